/** Small HTML/SVG rendering helpers shared by the panels. */

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Horizontal bars scaled to the largest absolute value. */
export function barChart(
  items: { label: string; value: number }[],
  width = 320,
): string {
  const maxAbs = Math.max(...items.map((d) => Math.abs(d.value)), 1e-12);
  const rows = items
    .map((d, i) => {
      const w = (Math.abs(d.value) / maxAbs) * width;
      const y = i * 24;
      return (
        `<text x="0" y="${y + 14}" class="bar-label">${escapeHtml(d.label)}</text>` +
        `<rect x="140" y="${y + 4}" width="${w.toFixed(1)}" height="14" ` +
        `class="${d.value >= 0 ? "bar-pos" : "bar-neg"}"></rect>` +
        `<text x="${140 + w + 4}" y="${y + 14}" class="bar-value">${d.value.toFixed(3)}</text>`
      );
    })
    .join("");
  const height = items.length * 24;
  return `<svg class="bars" viewBox="0 0 ${width + 220} ${height}" role="img">${rows}</svg>`;
}

/** Blue-to-red heatmap of a correlation matrix (diagonal exactly 1). */
export function heatmap(ids: string[], rho: number[][]): string {
  const cell = 16;
  const n = ids.length;
  const cells: string[] = [];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = rho[i][j];
      const hue = v >= 0 ? 220 - 220 * v : 220; // 1 -> red-ish 0, 0 -> blue
      cells.push(
        `<rect x="${j * cell}" y="${i * cell}" width="${cell}" height="${cell}" ` +
          `fill="hsl(${hue.toFixed(0)},70%,55%)" data-rho="${v}" ` +
          `data-pair="${escapeHtml(ids[i])}|${escapeHtml(ids[j])}"></rect>`,
      );
    }
  }
  return `<svg class="heatmap" viewBox="0 0 ${n * cell} ${n * cell}" role="img">${cells.join("")}</svg>`;
}

export interface DendrogramNode {
  id: number;
  x: number;
  height: number;
}

/**
 * Dendrogram geometry straight from the linkage rows (a, b, height, size).
 * Leaves are ids 0..n-1 at height 0; merges take ids n, n+1, ...
 */
export function dendrogramPaths(
  linkage: number[][],
  n: number,
): { paths: string[]; leafOrder: number[] } {
  // leaf order by recursive unrolling of the last merge
  const children = new Map<number, [number, number]>();
  linkage.forEach((row, k) => {
    children.set(n + k, [row[0], row[1]]);
  });
  const leafOrder: number[] = [];
  const unroll = (id: number): void => {
    const kids = children.get(id);
    if (!kids) {
      leafOrder.push(id);
      return;
    }
    unroll(kids[0]);
    unroll(kids[1]);
  };
  unroll(n + linkage.length - 1);

  const pos = new Map<number, DendrogramNode>();
  leafOrder.forEach((leaf, i) => pos.set(leaf, { id: leaf, x: i, height: 0 }));
  const paths: string[] = [];
  linkage.forEach((row, k) => {
    const a = pos.get(row[0])!;
    const b = pos.get(row[1])!;
    const h = row[2];
    paths.push(
      `M ${a.x} ${-a.height} V ${-h} H ${b.x} V ${-b.height}`.replace(
        /-0\b/g,
        "0",
      ),
    );
    pos.set(n + k, { id: n + k, x: (a.x + b.x) / 2, height: h });
  });
  return { paths, leafOrder };
}

export function dendrogram(
  linkage: number[][],
  n: number,
  ids: string[],
  cut: number,
): string {
  const { paths, leafOrder } = dendrogramPaths(linkage, n);
  const maxH = Math.max(...linkage.map((r) => r[2]), cut);
  const body = paths
    .map((d) => `<path d="${d}" class="merge"></path>`)
    .join("");
  const labels = leafOrder
    .map(
      (leaf, i) =>
        `<text x="${i}" y="0.6" class="leaf" font-size="0.25">${escapeHtml(ids[leaf])}</text>`,
    )
    .join("");
  const cutLine = `<line x1="-0.5" x2="${n - 0.5}" y1="${-cut}" y2="${-cut}" class="cut"></line>`;
  return (
    `<svg class="dendrogram" viewBox="-1 ${-(maxH * 1.1)} ${n + 1} ${maxH * 1.1 + 1}" role="img">` +
    `<g>${body}${cutLine}${labels}</g></svg>`
  );
}
