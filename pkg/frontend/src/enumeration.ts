import { renderErrorPanel, renderInstance } from "./graph.js";
import { esc } from "./html.js";
import { CategoryView, Universe } from "./types.js";

export const CATEGORY_KEYS = [
  "stayedValid",
  "becameValid",
  "stayedInvalid",
  "becameInvalid",
] as const;

export type CategoryKey = (typeof CATEGORY_KEYS)[number];

export const CATEGORY_LABELS: Record<CategoryKey, string> = {
  stayedValid: "stayed valid",
  becameValid: "became valid",
  stayedInvalid: "stayed invalid",
  becameInvalid: "became invalid",
};

export interface PaneState {
  view: CategoryView | null;
  collapsed: boolean;
}

export function renderCategoryPane(
  key: CategoryKey,
  state: PaneState,
  universe?: Universe | null,
): string {
  const view = state.view;
  const classes = ["pane"];
  if (state.collapsed) classes.push("collapsed");
  if (view?.stale) classes.push("stale");
  const badges: string[] = [];
  if (view?.stale) badges.push(`<span class="badge badge-stale">stale</span>`);
  if (view?.exhausted)
    badges.push(`<span class="badge badge-exhausted">exhausted</span>`);
  const position =
    view && view.instance !== null
      ? `<span class="position">#${view.position}</span>`
      : "";
  const advanceDisabled =
    !view || view.exhausted || view.stale || view.instance === null;
  const header =
    `<header>` +
    `<button data-action="toggle-pane" data-category="${key}">` +
    `${state.collapsed ? "+" : "−"}</button>` +
    `<h3>${esc(CATEGORY_LABELS[key])}</h3>${position}${badges.join("")}` +
    `<button data-action="advance" data-category="${key}"` +
    `${advanceDisabled ? " disabled" : ""}>next</button>` +
    `</header>`;

  let body = "";
  if (!state.collapsed) {
    if (view === null) {
      body = `<div class="pane-body pending">…</div>`;
    } else if (view.error) {
      body = `<div class="pane-body">${renderErrorPanel(view.error)}</div>`;
    } else if (view.instance === null) {
      body = `<div class="pane-body none">(none)</div>`;
    } else {
      body = `<div class="pane-body">${renderInstance(view.instance, {
        universe,
      })}</div>`;
    }
  }
  const generation = view ? ` data-generation="${view.generation}"` : "";
  return (
    `<section class="${classes.join(" ")}" data-category="${key}"` +
    `${generation}>${header}${body}</section>`
  );
}

/**
 * The four differential panes side by side. If fresh visible panes
 * disagree on generation a warning strip appears; the controller only
 * commits matched sets, so the strip showing up means a refresh is due.
 */
export function renderEnumerationView(
  panes: Record<CategoryKey, PaneState>,
  universe?: Universe | null,
): string {
  const gens = new Set<number>();
  for (const key of CATEGORY_KEYS) {
    const st = panes[key];
    if (!st.collapsed && st.view && !st.view.stale) gens.add(st.view.generation);
  }
  const warning =
    gens.size > 1
      ? `<div class="generation-warning">views out of sync, refreshing…</div>`
      : "";
  const body = CATEGORY_KEYS.map((key) =>
    renderCategoryPane(key, panes[key], universe),
  ).join("");
  return `<div class="enumeration">${warning}${body}</div>`;
}
