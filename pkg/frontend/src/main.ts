import { SessionClient } from './api.js';
import { EditorStore, PendingCommand } from './state.js';
import { segments } from './highlight.js';
import type { SuggestOptions, TaskKind } from './types.js';

const SERVER_URL = (window as any).COAUTHOR_SERVER ?? 'http://127.0.0.1:8000';
const SESSION_KEY = 'coauthor.session';

const store = new EditorStore(new SessionClient(SERVER_URL));

const editor = document.getElementById('editor') as HTMLTextAreaElement;
const backdrop = document.getElementById('backdrop') as HTMLDivElement;
const commandsBox = document.getElementById('commands') as HTMLDivElement;
const panelBox = document.getElementById('panel') as HTMLDivElement;
const previewBox = document.getElementById('preview') as HTMLTextAreaElement;
const sendButton = document.getElementById('send') as HTMLButtonElement;
const statusBox = document.getElementById('status') as HTMLDivElement;

let pending: PendingCommand | null = null;

function escapeHtml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function renderText(): void {
  if (editor.value !== store.text) {
    editor.value = store.text;
  }
  // the backdrop mirrors the textarea text with model spans wrapped in <mark>
  const html = segments(store.text, store.snapshot?.spans ?? [])
    .map((seg) =>
      seg.kind === 'model'
        ? `<mark title="${escapeHtml(seg.requestId ?? '')}">${escapeHtml(seg.text)}</mark>`
        : escapeHtml(seg.text),
    )
    .join('');
  backdrop.innerHTML = html + '\n';
}

function renderCommands(): void {
  commandsBox.innerHTML = '';
  for (const cmd of store.commands()) {
    const button = document.createElement('button');
    button.className = 'command';
    button.textContent = cmd.label;
    const kbd = document.createElement('kbd');
    kbd.textContent = cmd.shortcut;
    button.appendChild(kbd);
    button.addEventListener('click', () => runCommand(cmd.kind, cmd.needsTone, cmd.needsInstruction));
    commandsBox.appendChild(button);
  }
}

function renderPanel(): void {
  panelBox.innerHTML = '';
  if (store.hasConflict) {
    const banner = document.createElement('div');
    banner.className = 'banner';
    banner.textContent = 'The story changed since these suggestions were made.';
    const refresh = document.createElement('button');
    refresh.textContent = 'Refresh';
    refresh.addEventListener('click', async () => {
      await store.refresh();
      store.panel = null;
      renderAll();
    });
    banner.appendChild(refresh);
    panelBox.appendChild(banner);
  }
  if (!store.panel) return;
  const { choices, remarks } = store.panel;
  if (choices.length) {
    const header = document.createElement('h3');
    header.textContent = 'Suggestions';
    panelBox.appendChild(header);
    choices.forEach((entry, i) => {
      const item = document.createElement('button');
      item.className = 'candidate';
      item.textContent = entry.candidate.text;
      item.addEventListener('click', async () => {
        await store.choose(i);
        renderAll();
      });
      panelBox.appendChild(item);
    });
  }
  if (remarks.length) {
    const header = document.createElement('h3');
    header.textContent = 'Assistant remarks';
    panelBox.appendChild(header);
    for (const entry of remarks) {
      const item = document.createElement('div');
      item.className = 'remark';
      item.textContent = entry.candidate.text;
      panelBox.appendChild(item);
    }
  }
}

function renderStatus(): void {
  statusBox.textContent = store.lastError ?? `v${store.version}`;
  statusBox.classList.toggle('error', store.lastError !== null);
}

function renderAll(): void {
  renderText();
  renderCommands();
  renderPanel();
  renderStatus();
  sendButton.disabled = !previewBox.value.trim();
}

async function runCommand(kind: TaskKind, needsTone?: boolean, needsInstruction?: boolean): Promise<void> {
  const options: SuggestOptions = {};
  if (needsTone) {
    const tone = window.prompt('Rewrite it to be more…');
    if (!tone) return;
    options.tone = tone;
  }
  if (needsInstruction) {
    const instruction = window.prompt('Ask the assistant…');
    if (!instruction) return;
    options.instruction = instruction;
  }
  pending = { kind, selection: { ...store.selection }, options };
  previewBox.value = store.previewFor(kind, options);
  try {
    await store.suggest(kind, options);
  } catch {
    // error already recorded on the store
  }
  renderAll();
}

function trackSelection(): void {
  store.setSelection({ start: editor.selectionStart, end: editor.selectionEnd });
  renderCommands();
}

async function init(): Promise<void> {
  const saved = sessionStorage.getItem(SESSION_KEY);
  try {
    await store.open(saved ?? undefined);
  } catch {
    await store.open(); // saved session unknown to the server; start fresh
  }
  sessionStorage.setItem(SESSION_KEY, store.sessionId);

  editor.addEventListener('input', async () => {
    try {
      await store.applyTextChange(editor.value);
    } catch {
      await store.refresh(); // conflicting edit: re-read the server's text
    }
    renderAll();
  });
  for (const event of ['keyup', 'mouseup', 'select'] as const) {
    editor.addEventListener(event, trackSelection);
  }
  editor.addEventListener('scroll', () => {
    backdrop.scrollTop = editor.scrollTop;
  });

  previewBox.addEventListener('input', () => {
    sendButton.disabled = !previewBox.value.trim();
  });
  sendButton.addEventListener('click', async () => {
    if (!pending) {
      pending = { kind: 'custom', selection: { ...store.selection }, options: {} };
    }
    try {
      await store.sendPreview(pending, previewBox.value);
    } catch {
      // error already recorded on the store
    }
    renderAll();
  });

  document.addEventListener('keydown', (e) => {
    if (!e.ctrlKey) return;
    const byShortcut: Record<string, () => void> = {
      Enter: () => runCommand('continuation'),
      k: () => runCommand('custom', false, true),
    };
    const handler = byShortcut[e.key];
    if (handler) {
      e.preventDefault();
      handler();
    }
  });

  renderAll();
}

init().catch((err) => {
  statusBox.textContent = `Cannot reach the server at ${SERVER_URL}: ${err}`;
  statusBox.classList.add('error');
});
