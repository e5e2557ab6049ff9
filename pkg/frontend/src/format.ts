/** Pure display formatting, kept out of the DOM layer for testability. */

export function formatIou(iou: number | null): string {
  if (iou === null) return "—";
  return `${Math.round(iou * 100)}%`;
}
