/** Wire and client-side domain types for the annotation UI. */
export function isApiFailure(value) {
    return (typeof value === "object" &&
        value !== null &&
        "status" in value &&
        "code" in value &&
        "message" in value);
}
