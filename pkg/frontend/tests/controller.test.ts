import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { WorkbenchController } from "../src/controller.js";
import { CATEGORY_KEYS } from "../src/enumeration.js";
import { SessionEvent } from "../src/types.js";
import { RecordedServer, entriesFor, fixture } from "./mock.js";

function committed(generation: number): { generation: number; event: SessionEvent } {
  return {
    generation,
    event: { t: 0, type: "resultCommitted", generation },
  };
}

describe("differential session flow", () => {
  const meta = fixture.meta.lts;

  async function opened() {
    const server = new RecordedServer(entriesFor(meta.sessionId));
    const controller = new WorkbenchController(new ApiClient(server.fetch));
    await controller.open(meta.faulty, {
      scope: { default: 2, perSig: { Event: 1 } },
      debounceMs: 20,
    });
    return { server, controller };
  }

  it("opens with seeded panes, diagnostics and an empty focus", async () => {
    const { controller } = await opened();
    const s = controller.state.session!;
    expect(s.id).toBe(meta.sessionId);
    expect(s.diagnostics.map((d) => d.code)).toEqual(["VACUOUS_JOIN"]);
    for (const key of CATEGORY_KEYS) {
      expect(controller.state.panes[key].view?.generation).toBe(0);
    }
    expect(controller.state.panes.stayedValid.view!.instance).not.toBeNull();
    expect(controller.state.focus).toEqual([]);
    const html = controller.render();
    expect(html).toContain('class="workbench"');
    expect(html).toContain("focus-empty");
    expect(html).not.toContain('<div class="popup"');
  });

  it("refreshes every pane from a committed recompute event", async () => {
    const { controller } = await opened();
    await controller.edit(meta.correct);
    expect(controller.state.session!.generation).toBe(1);
    // Panes lag until the service announces the matching commit.
    expect(controller.state.panes.becameInvalid.view!.generation).toBe(0);
    await controller.handleEvent(committed(1));
    for (const key of CATEGORY_KEYS) {
      expect(controller.state.panes[key].view?.generation).toBe(1);
    }
    expect(controller.state.panes.becameInvalid.view!.instance).not.toBeNull();
    const html = controller.render();
    expect(html).not.toContain("generation-warning");
    const gens = [...html.matchAll(/data-generation="(\d+)"/g)].map((m) => m[1]);
    expect(new Set(gens)).toEqual(new Set(["1"]));
  });

  it("drops stale event frames without touching the service", async () => {
    const { server, controller } = await opened();
    await controller.edit(meta.correct);
    await controller.handleEvent(committed(1));
    const callsBefore = server.served.length;
    await controller.handleEvent(committed(0));
    expect(server.served.length).toBe(callsBefore);
    expect(controller.state.panes.becameInvalid.view!.generation).toBe(1);
  });

  it("shows closest and breakdown only while the pin disagrees", async () => {
    const { controller } = await opened();
    await controller.edit(meta.correct);
    await controller.handleEvent(committed(1));

    await controller.pin(meta.faultInstance, "valid");
    expect(controller.state.focus).toHaveLength(1);
    expect(controller.state.focus[0].currentStatus).toBe("invalid");
    let html = controller.render();
    expect(html).toContain("focus-closest");
    expect(html).toContain("focus-breakdown");
    expect(html).toContain('<td class="b-id">goal</td>');

    await controller.unpin(0);
    expect(controller.state.focus).toEqual([]);

    await controller.pin(meta.faultInstance, "invalid");
    html = controller.render();
    expect(html).toContain("badge-invalid");
    expect(html).not.toContain("focus-closest");
    expect(html).not.toContain("focus-breakdown");
  });

  it("advances a pane to the next witness", async () => {
    const { controller } = await opened();
    await controller.edit(meta.correct);
    await controller.handleEvent(committed(1));
    await controller.pin(meta.faultInstance, "valid");
    await controller.unpin(0);
    await controller.pin(meta.faultInstance, "invalid");
    expect(controller.state.panes.stayedValid.view!.position).toBe(0);
    await controller.advance("stayedValid");
    const view = controller.state.panes.stayedValid.view!;
    expect(view.position).toBe(1);
    expect(view.instance).not.toBeNull();
  });
});

describe("completion session flow", () => {
  const meta = fixture.meta.queue;

  async function opened() {
    const server = new RecordedServer(entriesFor(meta.sessionId));
    const controller = new WorkbenchController(new ApiClient(server.fetch));
    await controller.open(meta.model, {
      scope: { default: 2 },
      debounceMs: 20,
    });
    return { server, controller };
  }

  it("pops recorded completions with text, type and value", async () => {
    const { controller } = await opened();
    await controller.edit(meta.broken);
    expect(
      controller.state.session!.diagnostics.some(
        (d) => d.severity === "error",
      ),
    ).toBe(true);
    await controller.suggestAt(meta.offset);
    const popup = controller.state.popup!;
    expect(popup.offset).toBe(meta.offset);
    expect(popup.response.suggestions.map((s) => s.text)).toEqual([
      "link",
      "^link",
      "*link",
    ]);
    const html = controller.render();
    expect(html).toContain('<div class="popup">');
    expect(html).toContain('<td class="s-type">Node</td>');
    expect(html).toContain('<td class="s-value">{}</td>');
    expect(html).toContain('<mark class="diag error"');
  });

  it("applies a selection, re-queries, and hides a contextless popup", async () => {
    const { controller } = await opened();
    await controller.edit(meta.broken);
    await controller.suggestAt(meta.offset);
    await controller.selectSuggestion(0);
    expect(controller.state.session!.modelText).toBe(meta.selected);
    expect(controller.state.popup).toBeNull();
    expect(controller.render()).not.toContain('<div class="popup"');
  });
});
