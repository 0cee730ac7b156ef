import type { SelectionRange, SuggestOptions, TaskKind } from './types.js';

/**
 * Client-side mirror of the server's built-in final-turn wording, so the
 * prompt preview pane can show what a command will ask before it is sent.
 * Kept in sync with the shipped templates; the server remains the authority
 * for the bytes that actually go to the backend.
 */
export function buildPreview(
  kind: TaskKind,
  docText: string,
  selection: SelectionRange,
  options: SuggestOptions = {},
): string {
  const selected = docText.slice(selection.start, selection.end);
  switch (kind) {
    case 'continuation':
      return `Here is my story so far: \`${docText}'. Give me the next sentence.`;
    case 'infill': {
      const blanked =
        `${docText.slice(0, selection.start).replace(/\s+$/, '')} ______ ` +
        `${docText.slice(selection.end).replace(/^\s+/, '')}`;
      const words = options.n_words ?? countWords(selected);
      return `Here's another story: \`${blanked}' Fill in the blank with ${words} words.`;
    }
    case 'elaborate':
      return `Here's my story so far: \`${docText}' Describe the ${selected}.`;
    case 'rewrite': {
      const target = selection.start === selection.end ? docText : selected;
      return `Here is some text: ${target}\nPlease rewrite it to be more ${options.tone ?? ''}.`;
    }
    case 'custom':
      return `Here's my story so far: \`${docText}' ${options.instruction ?? ''}`;
  }
}

export function countWords(text: string): number {
  const matches = text.match(/\S+/g);
  return matches ? matches.length : 0;
}
