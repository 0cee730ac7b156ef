import { ApiError, SessionClient } from './api.js';
import { availableCommands, Command, ShortcutMap } from './commands.js';
import { diffToEdit } from './diff.js';
import { HighlightRange, modelHighlights } from './highlight.js';
import { buildPreview } from './preview.js';
import type {
  CandidateView,
  SelectionRange,
  SessionSnapshot,
  SuggestOptions,
  TaskKind,
} from './types.js';

export interface PanelEntry {
  candidate: CandidateView;
  /** Index into the server's candidate list, required by accept. */
  index: number;
}

export interface CandidatePanel {
  requestId: string;
  kind: TaskKind;
  baseVersion: number;
  /** Candidates the writer can insert into the story. */
  choices: PanelEntry[];
  /** Meta-flagged responses, shown as assistant remarks, not insertable. */
  remarks: PanelEntry[];
}

export interface PendingCommand {
  kind: TaskKind;
  selection: SelectionRange;
  options: SuggestOptions;
}

/**
 * Editor state machine. The store never rewrites document text locally:
 * every mutation goes through the edit/accept API and the displayed text is
 * re-read from the server, so what the writer sees is always the server's
 * document at the displayed version.
 */
export class EditorStore {
  snapshot: SessionSnapshot | null = null;
  selection: SelectionRange = { start: 0, end: 0 };
  panel: CandidatePanel | null = null;
  lastError: string | null = null;
  hasConflict = false;

  constructor(
    private readonly client: SessionClient,
    private readonly shortcuts: ShortcutMap = {},
  ) {}

  get sessionId(): string {
    if (!this.snapshot) throw new Error('no session open');
    return this.snapshot.session_id;
  }

  get text(): string {
    return this.snapshot?.text ?? '';
  }

  get version(): number {
    return this.snapshot?.version ?? 0;
  }

  async open(sessionId?: string): Promise<void> {
    const id = sessionId ?? (await this.client.createSession()).session_id;
    this.snapshot = await this.client.getSession(id);
    this.panel = null;
    this.hasConflict = false;
    this.lastError = null;
  }

  async refresh(): Promise<void> {
    this.snapshot = await this.client.getSession(this.sessionId);
    this.hasConflict = false;
  }

  setSelection(sel: SelectionRange): void {
    this.selection = sel;
  }

  commands(): Command[] {
    return availableCommands(this.text.length, this.selection, this.shortcuts);
  }

  highlights(): HighlightRange[] {
    return modelHighlights(this.snapshot?.spans ?? []);
  }

  /** Send a textarea edit as a minimal range replacement. */
  async applyTextChange(newText: string): Promise<void> {
    const edit = diffToEdit(this.text, newText);
    if (!edit) return;
    try {
      await this.client.edit(this.sessionId, { start: edit.start, end: edit.end }, edit.text, this.version);
      await this.refresh();
    } catch (err) {
      this.noteError(err);
      throw err;
    }
  }

  async suggest(kind: TaskKind, options: SuggestOptions = {}): Promise<CandidatePanel> {
    const needsSelection = kind === 'infill' || kind === 'elaborate';
    const sel =
      needsSelection || (kind === 'rewrite' && this.selection.start !== this.selection.end)
        ? this.selection
        : undefined;
    const baseVersion = this.version;
    try {
      const resp = await this.client.suggest(this.sessionId, kind, sel, options);
      const entries = resp.candidates.map((candidate, index) => ({ candidate, index }));
      this.panel = {
        requestId: resp.request_id,
        kind,
        baseVersion,
        choices: entries.filter((e) => !e.candidate.annotations.meta_text),
        remarks: entries.filter((e) => e.candidate.annotations.meta_text),
      };
      this.lastError = null;
      return this.panel;
    } catch (err) {
      this.noteError(err);
      throw err;
    }
  }

  /**
   * Accept one of the panel's insertable choices. On a version conflict the
   * document is left untouched and a refresh affordance is signalled instead.
   */
  async choose(choiceIndex: number): Promise<boolean> {
    if (!this.panel) throw new Error('no candidates to choose from');
    const entry = this.panel.choices[choiceIndex];
    if (!entry) throw new Error(`no choice at index ${choiceIndex}`);
    try {
      await this.client.accept(this.sessionId, this.panel.requestId, entry.index, this.panel.baseVersion);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.hasConflict = true;
        this.lastError = err.message;
        return false;
      }
      this.noteError(err);
      throw err;
    }
    this.panel = null;
    await this.refresh();
    return true;
  }

  /** The final-turn text a canned command would send, for the preview pane. */
  previewFor(kind: TaskKind, options: SuggestOptions = {}): string {
    return buildPreview(kind, this.text, this.selection, options);
  }

  /**
   * Send the preview box contents. An unchanged preview issues the original
   * command (byte-identical request); an edited one becomes a custom request
   * carrying the edited text; an empty one is refused.
   */
  async sendPreview(pending: PendingCommand, edited: string): Promise<CandidatePanel> {
    if (!edited.trim()) {
      throw new Error('prompt is empty');
    }
    const unchanged =
      edited === buildPreview(pending.kind, this.text, pending.selection, pending.options);
    if (unchanged) {
      return this.suggest(pending.kind, pending.options);
    }
    return this.suggest('custom', { instruction: edited });
  }

  private noteError(err: unknown): void {
    this.lastError = err instanceof Error ? err.message : String(err);
  }
}
