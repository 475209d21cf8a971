import { mulberry32 } from "./rng.js";

export interface Point {
  x: number;
  y: number;
}

/**
 * Ring layout with seeded jitter. Positions depend only on the atom
 * order and the seed, so identical instances always draw identically.
 */
export function layoutAtoms(
  atoms: string[],
  seed: number,
  width: number,
  height: number,
): Map<string, Point> {
  const rng = mulberry32(seed);
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.max(30, Math.min(width, height) / 2 - 44);
  const out = new Map<string, Point>();
  const n = atoms.length;
  atoms.forEach((atom, i) => {
    const angle = (i / Math.max(n, 1)) * 2 * Math.PI - Math.PI / 2;
    const jx = (rng() - 0.5) * 12;
    const jy = (rng() - 0.5) * 12;
    out.set(atom, {
      x: Math.round((cx + radius * Math.cos(angle) + jx) * 10) / 10,
      y: Math.round((cy + radius * Math.sin(angle) + jy) * 10) / 10,
    });
  });
  return out;
}
