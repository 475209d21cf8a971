import { ApiClient, SessionConfigWire } from "./api.js";
import { renderAnnotatedModel, renderDiagnosticsList } from "./editor.js";
import {
  CATEGORY_KEYS,
  CategoryKey,
  PaneState,
  renderEnumerationView,
} from "./enumeration.js";
import { renderFocusView } from "./focus.js";
import { GenerationGate } from "./generation.js";
import { esc } from "./html.js";
import { applySelection, renderSuggestionPopup } from "./popup.js";
import {
  EventMessage,
  FocusEntryWire,
  SessionWire,
  SuggestResponse,
  WireInstance,
} from "./types.js";

interface PopupState {
  offset: number;
  response: SuggestResponse;
  selected: number;
}

export interface WorkbenchState {
  session: SessionWire | null;
  panes: Record<CategoryKey, PaneState>;
  focus: FocusEntryWire[];
  popup: PopupState | null;
}

function emptyPanes(): Record<CategoryKey, PaneState> {
  return Object.fromEntries(
    CATEGORY_KEYS.map((k) => [k, { view: null, collapsed: false }]),
  ) as Record<CategoryKey, PaneState>;
}

/**
 * All UI state plus the service conversation. Every value rendered
 * comes from a service response; the controller never evaluates the
 * model itself. WebSocket messages are applied in arrival order and
 * filtered through a monotonic generation gate.
 */
export class WorkbenchController {
  readonly state: WorkbenchState = {
    session: null,
    panes: emptyPanes(),
    focus: [],
    popup: null,
  };
  private gate = new GenerationGate();

  constructor(private api: ApiClient) {}

  private get sid(): string {
    const s = this.state.session;
    if (!s) throw new Error("no open session");
    return s.id;
  }

  async open(text: string, config: SessionConfigWire = {}): Promise<void> {
    this.state.session = await this.api.openSession(text, config);
    this.gate.accept(this.state.session.generation);
    await this.api.waitIdle(this.sid);
    await this.refreshPanes();
    await this.refreshFocus();
  }

  async edit(text: string): Promise<void> {
    const res = await this.api.edit(this.sid, text);
    const s = this.state.session!;
    s.modelText = text;
    s.generation = res.generation;
    s.diagnostics = res.diagnostics;
    this.gate.accept(res.generation);
    // Fresh results arrive via generation-tagged events.
  }

  async refreshPanes(): Promise<void> {
    for (const key of CATEGORY_KEYS) {
      const pane = this.state.panes[key];
      if (pane.collapsed) continue;
      pane.view = await this.api.categoryView(this.sid, key);
    }
  }

  async refreshFocus(): Promise<void> {
    this.state.focus = (await this.api.getFocus(this.sid)).entries;
  }

  async advance(key: CategoryKey): Promise<void> {
    this.state.panes[key].view = await this.api.advance(this.sid, key);
  }

  async togglePane(key: CategoryKey): Promise<void> {
    const pane = this.state.panes[key];
    pane.collapsed = !pane.collapsed;
    const visible = CATEGORY_KEYS.filter((k) => !this.state.panes[k].collapsed);
    await this.api.setVisible(this.sid, visible);
    if (!pane.collapsed) {
      pane.view = await this.api.categoryView(this.sid, key);
    }
  }

  async pin(instance: WireInstance, expected: "valid" | "invalid"): Promise<void> {
    this.state.focus = (await this.api.pinFocus(this.sid, instance, expected)).entries;
  }

  async unpin(index: number): Promise<void> {
    this.state.focus = (await this.api.unpinFocus(this.sid, index)).entries;
  }

  async suggestAt(offset: number, source?: string): Promise<void> {
    const response = await this.api.suggestions(this.sid, offset, source);
    this.state.popup =
      response === null ? null : { offset, response, selected: 0 };
  }

  /** Insert the chosen completion, push the edit, re-query at the new cursor. */
  async selectSuggestion(index: number): Promise<void> {
    const popup = this.state.popup;
    if (!popup) return;
    const chosen = popup.response.suggestions[index];
    if (!chosen) return;
    const applied = applySelection(
      this.state.session!.modelText,
      popup.offset,
      chosen.text,
    );
    await this.edit(applied.text);
    await this.suggestAt(applied.offset);
  }

  async handleEvent(msg: EventMessage): Promise<void> {
    if (!this.gate.accept(msg.generation)) return;
    const kind = msg.event.type;
    if (kind === "resultCommitted") {
      await this.refreshPanes();
      await this.refreshFocus();
    } else if (kind === "scopeError" || kind === "compileFailed") {
      this.state.session = await this.api.getSession(this.sid);
    }
  }

  render(): string {
    const s = this.state.session;
    if (!s) return `<div class="workbench empty"></div>`;
    const banner = s.error
      ? `<div class="session-error">${esc(s.error)}</div>`
      : "";
    return (
      `<div class="workbench">` +
      banner +
      `<div class="editor">` +
      renderAnnotatedModel(s.modelText, s.diagnostics) +
      renderDiagnosticsList(s.diagnostics) +
      renderSuggestionPopup(
        this.state.popup?.response ?? null,
        this.state.popup?.selected ?? 0,
      ) +
      `</div>` +
      renderEnumerationView(this.state.panes, s.universe) +
      renderFocusView(this.state.focus, s.universe) +
      `</div>`
    );
  }
}
