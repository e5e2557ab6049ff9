/** Browser glue: file decode, canvas blitting, coordinate mapping,
 * downloads, and toasts.  Everything here is a thin adapter over the
 * pure modules so it stays out of the unit-test surface.
 */
export async function readFileBytes(file) {
    return new Uint8Array(await file.arrayBuffer());
}
/** Decode any browser-supported image file into an RGBA buffer. */
export async function decodeImageFile(bytes) {
    const bitmap = await createImageBitmap(new Blob([bytes]));
    const canvas = document.createElement("canvas");
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
    const ctx = canvas.getContext("2d");
    if (!ctx)
        throw new Error("2d canvas unavailable");
    ctx.drawImage(bitmap, 0, 0);
    const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
    bitmap.close();
    return { width: bitmap.width || data.width, height: data.height, data: data.data };
}
export function blit(canvas, frame) {
    if (canvas.width !== frame.width || canvas.height !== frame.height) {
        canvas.width = frame.width;
        canvas.height = frame.height;
    }
    const ctx = canvas.getContext("2d");
    if (!ctx)
        throw new Error("2d canvas unavailable");
    const pixels = ctx.createImageData(frame.width, frame.height);
    pixels.data.set(frame.data);
    ctx.putImageData(pixels, 0, 0);
}
/** Map a mouse event on the (CSS-scaled) canvas to image pixel coords. */
export function eventToImageCoords(event, canvas) {
    const rect = canvas.getBoundingClientRect();
    const x = Math.floor(((event.clientX - rect.left) / rect.width) * canvas.width);
    const y = Math.floor(((event.clientY - rect.top) / rect.height) * canvas.height);
    return { x, y };
}
export function downloadBytes(filename, bytes) {
    const url = URL.createObjectURL(new Blob([bytes], { type: "image/png" }));
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = filename;
    anchor.click();
    setTimeout(() => URL.revokeObjectURL(url), 0);
}
export function toast(container, message) {
    const node = document.createElement("div");
    node.className = "toast";
    node.textContent = message;
    container.appendChild(node);
    setTimeout(() => node.remove(), 4000);
}
