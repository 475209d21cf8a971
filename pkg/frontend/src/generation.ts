/**
 * Monotonic filter over generation-tagged pushes: anything older than
 * the newest generation already seen is dropped on the floor.
 */
export class GenerationGate {
  latest = -1;

  accept(generation: number): boolean {
    if (generation < this.latest) return false;
    this.latest = generation;
    return true;
  }
}
