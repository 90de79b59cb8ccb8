/** Bar-chart geometry for per-node aggregate vectors.
 *
 * Bars keep input order (the timeline when inputs are periodic
 * snapshots); missing entries render as gaps, never as zero-height
 * bars, so a context absent from one snapshot cannot fake a dip. */

export interface Bar {
  index: number;
  x: number;
  w: number;
  h: number;        // pixels, 0 only for an actual zero value
  missing: boolean;
  value: number | null;
}

export function planBars(vector: (number | null)[], width: number,
                         height: number): Bar[] {
  const present = vector.filter((v): v is number => v !== null);
  const max = present.length ? Math.max(...present) : 0;
  const n = vector.length || 1;
  const step = width / n;
  const barWidth = Math.max(step * 0.8, 1);
  return vector.map((value, index) => {
    const h = value === null || max === 0 ? 0 : (value / max) * height;
    return {
      index,
      x: index * step + (step - barWidth) / 2,
      w: barWidth,
      h,
      missing: value === null,
      value,
    };
  });
}

export function renderHistogram(container: HTMLElement,
                                vector: (number | null)[],
                                labels: string[]): void {
  container.textContent = '';
  const width = Math.max(container.clientWidth || 360, 120);
  const height = 120;
  const bars = planBars(vector, width, height - 16);
  const chart = document.createElement('div');
  chart.className = 'histogram';
  chart.style.width = `${width}px`;
  chart.style.height = `${height}px`;
  for (const bar of bars) {
    const el = document.createElement('div');
    el.className = bar.missing ? 'bar missing' : 'bar';
    el.style.left = `${bar.x}px`;
    el.style.width = `${bar.w}px`;
    el.style.height = `${Math.max(bar.h, bar.missing ? 0 : 1)}px`;
    el.title = bar.missing
        ? `${labels[bar.index] ?? bar.index}: absent`
        : `${labels[bar.index] ?? bar.index}: ${bar.value}`;
    chart.appendChild(el);
  }
  container.appendChild(chart);
}
