import { esc } from "./html.js";
import { SuggestResponse } from "./types.js";

/**
 * Completion popup: one row per suggestion with text, type and value
 * columns. `null` means the cursor has no completable context and the
 * popup stays hidden entirely.
 */
export function renderSuggestionPopup(
  response: SuggestResponse | null,
  selected = 0,
): string {
  if (response === null) return "";
  if (response.suggestions.length === 0) {
    return `<div class="popup popup-empty">no valid continuations</div>`;
  }
  const rows = response.suggestions
    .map((s, i) => {
      const cls = i === selected ? ` class="selected"` : "";
      return (
        `<tr${cls} data-action="select-suggestion" data-index="${i}" ` +
        `data-insert="${esc(s.text)}">` +
        `<td class="s-text">${esc(s.text)}</td>` +
        `<td class="s-type">${esc(s.type)}</td>` +
        `<td class="s-value">${s.value === null ? "" : esc(s.value)}</td></tr>`
      );
    })
    .join("");
  const more = response.truncated
    ? `<div class="popup-truncated">more…</div>`
    : "";
  return `<div class="popup"><table><tbody>${rows}</tbody></table>${more}</div>`;
}

/** Insert a chosen completion into the buffer at the query offset. */
export function applySelection(
  text: string,
  offset: number,
  insert: string,
): { text: string; offset: number } {
  return {
    text: text.slice(0, offset) + insert + text.slice(offset),
    offset: offset + insert.length,
  };
}
