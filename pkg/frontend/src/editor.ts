import { byteToCharIndex, esc } from "./html.js";
import { Diagnostic } from "./types.js";

/**
 * Model text with diagnostic spans wrapped in <mark> elements (spans
 * arrive as byte offsets). Overlapping spans keep the earlier one.
 */
export function renderAnnotatedModel(
  text: string,
  diagnostics: Diagnostic[],
): string {
  const spans = diagnostics
    .map((d) => ({
      start: byteToCharIndex(text, d.span[0]),
      end: byteToCharIndex(text, d.span[1]),
      d,
    }))
    .sort((a, b) => a.start - b.start || b.end - a.end);
  const parts: string[] = [];
  let at = 0;
  for (const { start, end, d } of spans) {
    if (start < at) continue;
    parts.push(esc(text.slice(at, start)));
    parts.push(
      `<mark class="diag ${d.severity}" data-span="${d.span[0]},${d.span[1]}" ` +
        `title="${esc(`${d.code}: ${d.message}`)}">` +
        `${esc(text.slice(start, Math.max(end, start)))}</mark>`,
    );
    at = Math.max(end, start);
  }
  parts.push(esc(text.slice(at)));
  return `<pre class="model-text">${parts.join("")}</pre>`;
}

export function renderDiagnosticsList(diagnostics: Diagnostic[]): string {
  if (diagnostics.length === 0) return `<div class="diags diags-clean"></div>`;
  const items = diagnostics
    .map(
      (d) =>
        `<li class="${d.severity}" data-span="${d.span[0]},${d.span[1]}">` +
        `${esc(d.code)}: ${esc(d.message)}</li>`,
    )
    .join("");
  return `<ul class="diags">${items}</ul>`;
}
