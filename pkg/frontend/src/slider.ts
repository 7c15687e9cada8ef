/**
 * Coupled four-slider confidence panel.
 *
 * The four category values are integers in [0, 100] and always sum to
 * exactly 100: moving one slider pins it at the requested value and
 * redistributes the remainder across the other three in proportion to
 * their previous values (equal split when all three are zero), with
 * integer rounding fixed up by largest remainder.
 */

export const CATEGORIES = ["metal", "shiny_black", "shiny_white", "something_else"] as const;

export type Category = (typeof CATEGORIES)[number];

export type SliderPanelState = Record<Category, number>;

export const CATEGORY_LABELS: Record<Category, string> = {
  metal: "Metal",
  shiny_black: "Shiny black",
  shiny_white: "Shiny white",
  something_else: "Something else",
};

const TOTAL = 100;

export function initialState(): SliderPanelState {
  return { metal: 25, shiny_black: 25, shiny_white: 25, something_else: 25 };
}

export function panelSum(state: SliderPanelState): number {
  return CATEGORIES.reduce((acc, c) => acc + state[c], 0);
}

function clampTarget(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(TOTAL, Math.max(0, Math.round(value)));
}

/**
 * Set one slider to `target` and rebalance the other three so the panel
 * sums to exactly 100. Inputs are clamped and rounded to integers.
 */
export function adjustSlider(
  state: SliderPanelState,
  which: Category,
  target: number,
): SliderPanelState {
  const pinned = clampTarget(target);
  const residual = TOTAL - pinned;
  const others = CATEGORIES.filter((c) => c !== which);
  const weights = others.map((c) => state[c]);
  const weightSum = weights.reduce((a, b) => a + b, 0);

  const raw = others.map((_, i) =>
    weightSum === 0 ? residual / others.length : (residual * weights[i]) / weightSum,
  );
  const floors = raw.map(Math.floor);
  let leftover = residual - floors.reduce((a, b) => a + b, 0);

  // hand the leftover units to the largest fractional remainders
  const byRemainder = raw
    .map((value, i) => ({ i, frac: value - Math.floor(value) }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  const shares = floors.slice();
  for (const { i } of byRemainder) {
    if (leftover <= 0) break;
    shares[i] += 1;
    leftover -= 1;
  }

  const next = { ...state, [which]: pinned };
  others.forEach((c, i) => {
    next[c] = shares[i];
  });
  return next;
}
