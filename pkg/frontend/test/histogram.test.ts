import {describe, expect, it} from 'vitest';

import {planBars} from '../src/histogram.js';

describe('histogram bars', () => {
  it('keeps input order with ascending heights for a growth pattern', () => {
    const bars = planBars([10, 20, 30, 40], 400, 100);
    expect(bars.length).toBe(4);
    for (let i = 1; i < bars.length; i++) {
      expect(bars[i].h).toBeGreaterThan(bars[i - 1].h);
      expect(bars[i].x).toBeGreaterThan(bars[i - 1].x);
    }
    expect(bars[3].h).toBe(100);
  });

  it('renders missing entries as gaps, not zeros', () => {
    const bars = planBars([10, null, 30], 300, 90);
    expect(bars[1].missing).toBe(true);
    expect(bars[1].h).toBe(0);
    expect(bars[0].missing).toBe(false);
    expect(bars[0].h).toBeGreaterThan(0);
    // a real zero is a present bar, distinct from a gap
    const withZero = planBars([0, 30], 200, 90);
    expect(withZero[0].missing).toBe(false);
  });

  it('handles a singleton vector', () => {
    const bars = planBars([7], 100, 50);
    expect(bars.length).toBe(1);
    expect(bars[0].h).toBe(50);
  });

  it('handles an all-missing vector without dividing by zero', () => {
    const bars = planBars([null, null], 100, 50);
    expect(bars.every((b) => b.missing && b.h === 0)).toBe(true);
  });
});
