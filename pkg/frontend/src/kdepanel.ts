// Geometry helpers for the density overlay panel: pure functions that turn
// curves and a probe value into SVG path/coordinate data.

import type { KdeCurve } from "./api.js";

export interface PanelBox {
  width: number;
  height: number;
  padding: number;
}

export interface CurvePath {
  label: string;
  path: string; // SVG path data
}

export interface OverlayGeometry {
  curves: CurvePath[];
  probeX: number | null; // x pixel of the entered value, if within range
  xMin: number;
  xMax: number;
  yMax: number;
}

export function overlayGeometry(
  curves: { label: string; curve: KdeCurve }[],
  probeValue: number | null,
  box: PanelBox,
): OverlayGeometry {
  if (curves.length === 0) {
    return { curves: [], probeX: null, xMin: 0, xMax: 1, yMax: 1 };
  }
  const xMin = Math.min(...curves.map(({ curve }) => curve.grid[0] ?? 0));
  const xMax = Math.max(...curves.map(({ curve }) => curve.grid[curve.grid.length - 1] ?? 1));
  const yMax = Math.max(...curves.map(({ curve }) => Math.max(...curve.density)), 1e-12);

  const innerW = box.width - 2 * box.padding;
  const innerH = box.height - 2 * box.padding;
  const toX = (x: number) => box.padding + ((x - xMin) / (xMax - xMin || 1)) * innerW;
  const toY = (d: number) => box.height - box.padding - (d / yMax) * innerH;

  const paths: CurvePath[] = curves.map(({ label, curve }) => {
    const parts: string[] = [];
    for (let i = 0; i < curve.grid.length; i++) {
      const cmd = i === 0 ? "M" : "L";
      parts.push(`${cmd}${toX(curve.grid[i]!).toFixed(2)},${toY(curve.density[i]!).toFixed(2)}`);
    }
    return { label, path: parts.join(" ") };
  });

  let probeX: number | null = null;
  if (probeValue !== null && probeValue >= xMin && probeValue <= xMax) {
    probeX = toX(probeValue);
  }
  return { curves: paths, probeX, xMin, xMax, yMax };
}
