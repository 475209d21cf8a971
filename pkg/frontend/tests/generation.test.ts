import { describe, expect, it } from "vitest";

import { GenerationGate } from "../src/generation.js";
import { parseEventMessage } from "../src/api.js";

describe("GenerationGate", () => {
  it("accepts forward progress and repeats of the newest generation", () => {
    const gate = new GenerationGate();
    expect(gate.accept(0)).toBe(true);
    expect(gate.accept(1)).toBe(true);
    expect(gate.accept(1)).toBe(true);
    expect(gate.accept(2)).toBe(true);
  });

  it("drops anything older than the newest seen", () => {
    const gate = new GenerationGate();
    gate.accept(2);
    expect(gate.accept(1)).toBe(false);
    expect(gate.accept(0)).toBe(false);
    expect(gate.latest).toBe(2);
    expect(gate.accept(5)).toBe(true);
  });
});

describe("parseEventMessage", () => {
  it("round-trips a streamed event frame", () => {
    const msg = parseEventMessage(
      '{"generation":3,"event":{"t":1.5,"type":"solveStarted","generation":3}}',
    );
    expect(msg.generation).toBe(3);
    expect(msg.event.type).toBe("solveStarted");
    expect(msg.event.t).toBe(1.5);
  });
});
