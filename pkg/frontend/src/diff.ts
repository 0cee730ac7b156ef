export interface RangeEdit {
  start: number;
  end: number;
  text: string;
}

/**
 * Minimal single-range edit turning `before` into `after`, found by trimming
 * the common prefix and suffix. Keeps provenance intact outside the touched
 * range when sent to the server.
 */
export function diffToEdit(before: string, after: string): RangeEdit | null {
  if (before === after) return null;
  let prefix = 0;
  const max = Math.min(before.length, after.length);
  while (prefix < max && before[prefix] === after[prefix]) prefix++;
  let suffix = 0;
  while (
    suffix < max - prefix &&
    before[before.length - 1 - suffix] === after[after.length - 1 - suffix]
  ) {
    suffix++;
  }
  return {
    start: prefix,
    end: before.length - suffix,
    text: after.slice(prefix, after.length - suffix),
  };
}
