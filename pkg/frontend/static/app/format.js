/** Pure display formatting, kept out of the DOM layer for testability. */
export function formatIou(iou) {
    if (iou === null)
        return "—";
    return `${Math.round(iou * 100)}%`;
}
