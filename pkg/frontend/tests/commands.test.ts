import { describe, expect, it } from 'vitest';

import { availableCommands, DEFAULT_SHORTCUTS } from '../src/commands.js';

const DOC_LENGTH = 48;

describe('selection-dependent command availability', () => {
  it('a caret offers continuation and the custom prompt', () => {
    const ids = availableCommands(DOC_LENGTH, { start: 10, end: 10 }).map((c) => c.id);
    expect(ids).toContain('continue');
    expect(ids).toContain('custom');
    expect(ids).not.toContain('rewrite-this');
    expect(ids).not.toContain('elaborate');
    expect(ids).not.toContain('rewrite-tone');
  });

  it('a non-empty selection offers the selection commands instead', () => {
    const commands = availableCommands(DOC_LENGTH, { start: 3, end: 12 });
    const ids = commands.map((c) => c.id);
    expect(ids).toEqual(['rewrite-this', 'elaborate', 'rewrite-tone', 'custom']);
    expect(commands.find((c) => c.id === 'rewrite-this')!.label).toBe('Rewrite this');
    expect(commands.find((c) => c.id === 'rewrite-this')!.kind).toBe('infill');
  });

  it('an empty document offers only the custom prompt', () => {
    const ids = availableCommands(0, { start: 0, end: 0 }).map((c) => c.id);
    expect(ids).toEqual(['custom']);
  });

  it('every visible command carries a keyboard shortcut', () => {
    for (const cmd of availableCommands(DOC_LENGTH, { start: 0, end: 5 })) {
      expect(cmd.shortcut).toBe(DEFAULT_SHORTCUTS[cmd.id]);
      expect(cmd.shortcut.length).toBeGreaterThan(0);
    }
  });

  it('shortcuts are configurable', () => {
    const commands = availableCommands(DOC_LENGTH, { start: 0, end: 0 }, { continue: 'F5' });
    expect(commands.find((c) => c.id === 'continue')!.shortcut).toBe('F5');
  });
});
