import { renderErrorPanel, renderInstance } from "./graph.js";
import { esc } from "./html.js";
import { BreakdownReport, FocusEntryWire, Universe } from "./types.js";

function renderBreakdown(report: BreakdownReport): string {
  const rows = report.rows
    .map((row) => {
      const sub = (row.perBinding ?? [])
        .map((b) => {
          const env = Object.entries(b.bindings)
            .map(([k, v]) => `${esc(k)}=${esc(v)}`)
            .join(", ");
          return (
            `<tr class="binding"><td>${env}</td>` +
            `<td>${b.valueOnA}</td><td>${b.valueOnB}</td></tr>`
          );
        })
        .join("");
      return (
        `<tr class="breakdown-row" data-action="highlight-span" ` +
        `data-span="${row.span[0]},${row.span[1]}">` +
        `<td class="b-id">${esc(row.id)}</td>` +
        `<td class="b-formula"><code>${esc(row.formula)}</code></td>` +
        `<td>${row.valueOnA}</td><td>${row.valueOnB}</td></tr>` +
        sub
      );
    })
    .join("");
  return (
    `<table class="breakdown"><thead><tr>` +
    `<th>formula</th><th></th><th>pinned</th><th>closest</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

/**
 * One pinned instance: graph + status badge, then, only when the
 * current status disagrees with the expectation, the nearest
 * conforming instance and the formula-by-formula breakdown.
 */
export function renderFocusEntry(
  entry: FocusEntryWire,
  universe?: Universe | null,
): string {
  const classes = ["focus-entry"];
  if (entry.stale) classes.push("stale");
  const badge = entry.error
    ? `<span class="badge badge-error">error</span>`
    : `<span class="badge badge-${entry.currentStatus}">` +
      `${esc(entry.currentStatus ?? "?")}</span>`;
  const head =
    `<header><h3>pinned #${entry.index}</h3>` +
    `<span class="expected">expected ${esc(entry.expected)}</span>${badge}` +
    `<button data-action="unpin" data-index="${entry.index}">unpin</button>` +
    `</header>`;

  const panes: string[] = [];
  if (entry.error) {
    panes.push(renderErrorPanel(entry.error));
  } else if (entry.instance) {
    panes.push(
      `<div class="focus-pinned">${renderInstance(entry.instance, {
        universe,
      })}</div>`,
    );
  }

  const mismatch =
    !entry.error &&
    entry.currentStatus !== null &&
    entry.currentStatus !== entry.expected;
  if (mismatch) {
    if (entry.closest) {
      panes.push(
        `<div class="focus-closest"><h4>closest ${esc(entry.expected)}</h4>` +
          `${renderInstance(entry.closest, { universe })}</div>`,
      );
    }
    if (entry.breakdown) {
      panes.push(
        `<div class="focus-breakdown">${renderBreakdown(entry.breakdown)}</div>`,
      );
    }
  }
  return `<article class="${classes.join(" ")}">${head}${panes.join("")}</article>`;
}

export function renderFocusView(
  entries: FocusEntryWire[],
  universe?: Universe | null,
): string {
  if (entries.length === 0) return `<div class="focus focus-empty"></div>`;
  const body = entries.map((e) => renderFocusEntry(e, universe)).join("");
  return `<div class="focus">${body}</div>`;
}
