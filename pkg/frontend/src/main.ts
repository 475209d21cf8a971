import { ApiClient, parseEventMessage } from "./api.js";
import { WorkbenchController } from "./controller.js";
import { CategoryKey } from "./enumeration.js";

const DEMO_MODEL = `sig Queue { head: lone Node }
sig Node { link: lone Node }

fact WellFormed {
  all n: Node | n !in n.^link
  all n: Node | n in Queue.head.*link
}

pred lastLink { all n: Queue.head.^link | no n.link }

run lastLink for 3
`;

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const input = document.getElementById("model") as HTMLTextAreaElement | null;
  if (!root || !input) return;

  const api = new ApiClient((url, init) => fetch(url, init));
  const controller = new WorkbenchController(api);
  const rerender = () => {
    root.innerHTML = controller.render();
  };

  input.value = DEMO_MODEL;
  await controller.open(DEMO_MODEL, { scope: { default: 3 }, debounceMs: 300 });
  rerender();

  const sid = controller.state.session!.id;
  const ws = new WebSocket(
    `ws://${location.host}/sessions/${sid}/events`,
  );
  let chain: Promise<void> = Promise.resolve();
  ws.onmessage = (ev) => {
    // Serialize handling so messages apply in arrival order.
    chain = chain
      .then(() => controller.handleEvent(parseEventMessage(String(ev.data))))
      .then(rerender);
  };

  let editTimer: ReturnType<typeof setTimeout> | undefined;
  input.addEventListener("input", () => {
    clearTimeout(editTimer);
    editTimer = setTimeout(async () => {
      await controller.edit(input.value);
      const cursor = input.selectionStart ?? input.value.length;
      await controller.suggestAt(cursor);
      rerender();
    }, 200);
  });

  root.addEventListener("click", async (ev) => {
    const el = (ev.target as Element | null)?.closest<HTMLElement>("[data-action]");
    if (!el) return;
    const action = el.dataset.action;
    if (action === "advance") {
      await controller.advance(el.dataset.category as CategoryKey);
    } else if (action === "toggle-pane") {
      await controller.togglePane(el.dataset.category as CategoryKey);
    } else if (action === "unpin") {
      await controller.unpin(Number(el.dataset.index));
    } else if (action === "select-suggestion") {
      await controller.selectSuggestion(Number(el.dataset.index));
      input.value = controller.state.session!.modelText;
    } else if (action === "highlight-span") {
      const [start] = (el.dataset.span ?? "0,0").split(",").map(Number);
      input.focus();
      input.setSelectionRange(start, start);
      return;
    }
    rerender();
  });
}

void boot();
