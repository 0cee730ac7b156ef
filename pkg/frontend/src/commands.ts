import type { SelectionRange, TaskKind } from './types.js';

export interface Command {
  id: string;
  kind: TaskKind;
  label: string;
  shortcut: string;
  needsSelection: boolean;
  needsTone?: boolean;
  needsInstruction?: boolean;
}

export type ShortcutMap = Partial<Record<string, string>>;

export const DEFAULT_SHORTCUTS: Record<string, string> = {
  continue: 'Ctrl+Enter',
  'rewrite-this': 'Ctrl+I',
  elaborate: 'Ctrl+E',
  'rewrite-tone': 'Ctrl+R',
  custom: 'Ctrl+K',
};

const ALL_COMMANDS: Omit<Command, 'shortcut'>[] = [
  { id: 'continue', kind: 'continuation', label: 'Get continuations', needsSelection: false },
  { id: 'rewrite-this', kind: 'infill', label: 'Rewrite this', needsSelection: true },
  { id: 'elaborate', kind: 'elaborate', label: 'Elaborate on this', needsSelection: true },
  {
    id: 'rewrite-tone',
    kind: 'rewrite',
    label: 'Rewrite with tone…',
    needsSelection: true,
    needsTone: true,
  },
  {
    id: 'custom',
    kind: 'custom',
    label: 'Ask the assistant…',
    needsSelection: false,
    needsInstruction: true,
  },
];

/**
 * Commands visible for the current selection state. Availability is a pure
 * function of the selection: a caret offers continuation (plus the custom
 * prompt), a non-empty selection offers the selection-focused commands.
 * An empty document offers only the custom prompt and plain typing.
 */
export function availableCommands(
  docLength: number,
  selection: SelectionRange,
  shortcuts: ShortcutMap = {},
): Command[] {
  const caret = selection.start === selection.end;
  const visible = ALL_COMMANDS.filter((cmd) => {
    if (cmd.id === 'custom') return true;
    if (docLength === 0) return false;
    return caret ? !cmd.needsSelection : cmd.needsSelection;
  });
  return visible.map((cmd) => ({
    ...cmd,
    shortcut: shortcuts[cmd.id] ?? DEFAULT_SHORTCUTS[cmd.id] ?? '',
  }));
}
