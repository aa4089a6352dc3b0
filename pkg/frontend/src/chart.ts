/**
 * Dependency-free SVG line charts for weekly series.
 */

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface ChartSeries {
  label: string;
  points: number[];
  color: string;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
}

function scale(
  value: number, lo: number, hi: number, outLo: number, outHi: number,
): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

/**
 * Render series as polylines over a shared week axis.  Each polyline
 * carries `data-series` and `data-count` attributes so tests (and
 * tooling) can inspect how many weeks are plotted.
 */
export function lineChart(series: ChartSeries[], options: ChartOptions = {}): SVGSVGElement {
  const width = options.width ?? 360;
  const height = options.height ?? 140;
  const padLeft = 34;
  const padRight = 8;
  const padTop = options.title ? 22 : 8;
  const padBottom = 18;

  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('class', 'line-chart');

  const values = series.flatMap((s) => s.points);
  const maxLen = Math.max(0, ...series.map((s) => s.points.length));
  const lo = Math.min(0, ...values);
  const hi = Math.max(1, ...values);

  if (options.title) {
    const title = document.createElementNS(SVG_NS, 'text');
    title.setAttribute('x', '4');
    title.setAttribute('y', '14');
    title.setAttribute('class', 'chart-title');
    title.textContent = options.title;
    svg.appendChild(title);
  }

  const axis = document.createElementNS(SVG_NS, 'line');
  axis.setAttribute('x1', String(padLeft));
  axis.setAttribute('y1', String(height - padBottom));
  axis.setAttribute('x2', String(width - padRight));
  axis.setAttribute('y2', String(height - padBottom));
  axis.setAttribute('stroke', '#999');
  svg.appendChild(axis);

  for (const bound of [lo, hi]) {
    const label = document.createElementNS(SVG_NS, 'text');
    label.setAttribute('x', '2');
    label.setAttribute(
      'y',
      String(scale(bound, lo, hi, height - padBottom, padTop) + 4),
    );
    label.setAttribute('class', 'chart-axis-label');
    label.textContent = String(Math.round(bound));
    svg.appendChild(label);
  }

  for (const one of series) {
    const line = document.createElementNS(SVG_NS, 'polyline');
    const coordinates = one.points.map((value, index) => {
      const x = maxLen > 1
        ? scale(index, 0, maxLen - 1, padLeft, width - padRight)
        : (padLeft + width - padRight) / 2;
      const y = scale(value, lo, hi, height - padBottom, padTop);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
    line.setAttribute('points', coordinates.join(' '));
    line.setAttribute('fill', 'none');
    line.setAttribute('stroke', one.color);
    line.setAttribute('stroke-width', '1.5');
    line.setAttribute('data-series', one.label);
    line.setAttribute('data-count', String(one.points.length));
    svg.appendChild(line);
  }
  return svg;
}

export const SERIES_COLORS: Record<string, string> = {
  retailer: '#1f77b4',
  wholesaler: '#ff7f0e',
  distributor: '#2ca02c',
  factory: '#d62728',
  inventory: '#1f77b4',
  backlog: '#d62728',
  order: '#ff7f0e',
  demand: '#7f7f7f',
  cost: '#9467bd',
};
