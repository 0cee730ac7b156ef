import { beforeEach, describe, expect, it } from 'vitest';

import { SessionClient } from '../src/api.js';
import { EditorStore } from '../src/state.js';
import { candidate, FakeSessionServer } from './fake_server.js';

const STORY = 'An elderly man was sitting alone on a dark path.';

describe('editor store against a stubbed API', () => {
  let server: FakeSessionServer;
  let store: EditorStore;

  beforeEach(async () => {
    server = new FakeSessionServer();
    store = new EditorStore(new SessionClient('http://stub', server.fetch));
    await store.open();
  });

  it('typing sends a minimal edit and re-reads the server text', async () => {
    await store.applyTextChange(STORY);
    expect(store.text).toBe(STORY);
    expect(store.version).toBe(1);
    expect(server.calls.some((c) => c.path === '/sessions/s1/edit')).toBe(true);
    // displayed text is the server's text, not a local mutation
    expect(store.text).toBe(server.text);
  });

  it('choosing a candidate accepts it and refreshes the document', async () => {
    await store.applyTextChange(STORY);
    server.nextCandidates = [
      candidate('The air was cold.'),
      candidate('A light appeared.'),
      candidate('The moon rose.'),
    ];
    const panel = await store.suggest('continuation');
    expect(panel.choices).toHaveLength(3);

    const ok = await store.choose(0);
    expect(ok).toBe(true);
    expect(store.panel).toBeNull();
    expect(store.text).toBe(`${STORY} The air was cold.`);
    expect(store.text).toBe(server.text);
    expect(store.highlights()).toHaveLength(1);
    expect(store.highlights()[0].requestId).toBe('req-1');
  });

  it('meta-flagged candidates land in the remarks group and are not choosable', async () => {
    await store.applyTextChange(STORY);
    server.nextCandidates = [
      candidate('A story continuation.'),
      candidate("What's the story about?", true),
      candidate('Another continuation.'),
    ];
    const panel = await store.suggest('continuation');
    expect(panel.choices.map((e) => e.candidate.text)).toEqual([
      'A story continuation.',
      'Another continuation.',
    ]);
    expect(panel.remarks.map((e) => e.candidate.text)).toEqual(["What's the story about?"]);

    // choosing the second visible choice accepts the server-side index 2
    await store.choose(1);
    expect(store.text).toBe(`${STORY} Another continuation.`);
  });

  it('a version conflict shows a refresh affordance and never mutates text', async () => {
    await store.applyTextChange(STORY);
    server.nextCandidates = [candidate('Too late.')];
    await store.suggest('continuation');

    // another client edits behind our back
    server.replaceRange(0, 0, 'Ahem. ', 'human');

    const before = store.text;
    const ok = await store.choose(0);
    expect(ok).toBe(false);
    expect(store.hasConflict).toBe(true);
    expect(store.text).toBe(before); // non-destructive
    expect(store.panel).not.toBeNull(); // panel kept for after the refresh

    await store.refresh();
    expect(store.hasConflict).toBe(false);
    expect(store.text).toBe(server.text);
  });

  it('infill suggestions carry the selection to the server', async () => {
    await store.applyTextChange(STORY);
    store.setSelection({ start: 3, end: 10 });
    server.nextCandidates = [candidate('aged')];
    await store.suggest('infill', { n_words: 2 });
    const call = server.calls.find((c) => c.path === '/sessions/s1/suggest');
    expect(call!.body.start).toBe(3);
    expect(call!.body.end).toBe(10);
    expect(call!.body.n_words).toBe(2);
  });
});
