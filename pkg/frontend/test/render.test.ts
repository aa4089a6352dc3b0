import { describe, expect, it } from 'vitest';

import { parseViewPayload, ProtocolError } from '../src/protocol.js';
import { renderDashboard } from '../src/render.js';
import { initialViewModel, lockInput, withMalformed, withPayload } from '../src/state.js';
import {
  finishedPayload,
  fullPayload,
  handTracePayload,
  restrictedPayload,
} from './fixtures.js';

function rendered(payload = restrictedPayload()) {
  return renderDashboard(withPayload(initialViewModel(), payload));
}

describe('restricted dashboard', () => {
  it('renders exactly one role panel and no peer cost elements', () => {
    const root = rendered(restrictedPayload());
    expect(root.querySelectorAll('.role-panel')).toHaveLength(1);
    expect(root.querySelectorAll('.peer-cost')).toHaveLength(0);
    expect(root.querySelectorAll('.peers-panel')).toHaveLength(0);
    expect(root.querySelectorAll('.chart-chain-orders')).toHaveLength(0);
  });

  it('still shows the own demand stream', () => {
    const root = rendered(restrictedPayload());
    const orders = root.querySelector('.chart-orders polyline[data-series="demand"]');
    expect(orders).not.toBeNull();
    expect(orders!.getAttribute('data-count')).toBe('2');
  });
});

describe('full dashboard', () => {
  it('adds peer panels with cost fields and the chain order chart', () => {
    const root = rendered(fullPayload());
    expect(root.querySelectorAll('.peer-panel')).toHaveLength(3);
    expect(root.querySelectorAll('.peer-cost')).toHaveLength(3);
    const chain = root.querySelectorAll('.chart-chain-orders polyline');
    expect(chain).toHaveLength(4);
  });
});

describe('order entry', () => {
  it('is enabled only while awaiting orders on a human seat', () => {
    const root = rendered(restrictedPayload());
    const input = root.querySelector('.order-input') as HTMLInputElement;
    const button = root.querySelector('.order-submit') as HTMLButtonElement;
    expect(input.disabled).toBe(false);
    expect(button.disabled).toBe(false);
  });

  it('locks while a submission is in flight', () => {
    const model = lockInput(withPayload(initialViewModel(), restrictedPayload()));
    const root = renderDashboard(model);
    expect((root.querySelector('.order-input') as HTMLInputElement).disabled).toBe(true);
    expect(root.querySelector('.order-waiting')?.textContent).toContain('sending');
  });

  it('stays read-only after this week\'s order was submitted', () => {
    const payload = restrictedPayload();
    payload.own!.pending_submitted = true;
    const root = rendered(payload);
    expect((root.querySelector('.order-submit') as HTMLButtonElement).disabled).toBe(true);
    expect(root.querySelector('.order-waiting')?.textContent).toContain('waiting');
  });

  it('is absent for agent seats', () => {
    const payload = restrictedPayload();
    payload.own!.seat = 'agent';
    const root = rendered(payload);
    expect(root.querySelector('.order-entry')).toBeNull();
  });
});

describe('finished session', () => {
  it('disables entry and shows the final summary card', () => {
    const root = rendered(finishedPayload());
    expect(root.querySelector('.order-entry')).toBeNull();
    const card = root.querySelector('.summary-card');
    expect(card).not.toBeNull();
    expect(card!.textContent).toContain('1067.00');
    expect(root.querySelector('.chain-total')?.textContent).toBe('1067.00');
  });
});

describe('hand-traced ledger payload', () => {
  it('plots exactly the traced points', () => {
    const root = rendered(handTracePayload());
    const inventory = root.querySelector(
      '.chart-stock polyline[data-series="inventory"]',
    )!;
    expect(inventory.getAttribute('data-count')).toBe('3');
    const xs = inventory
      .getAttribute('points')!
      .split(' ')
      .map((pair) => Number(pair.split(',')[1]));
    // Inventory 12 -> 16 -> 20 must plot strictly upward (SVG y falls).
    expect(xs[0]).toBeGreaterThan(xs[1]);
    expect(xs[1]).toBeGreaterThan(xs[2]);
    const cost = root.querySelector('.chart-cost polyline[data-series="cum_cost"]')!;
    expect(cost.getAttribute('data-count')).toBe('3');
    expect(root.textContent).toContain('24.00');
  });
});

describe('malformed payloads', () => {
  it('parse rejects missing role blocks', () => {
    expect(() => parseViewPayload({ v: 1 })).toThrow(ProtocolError);
    const bad = restrictedPayload() as unknown as Record<string, unknown>;
    delete bad.own;
    expect(() => parseViewPayload(bad)).toThrow(ProtocolError);
    expect(() => parseViewPayload({ ...restrictedPayload(), v: 2 })).toThrow(ProtocolError);
  });

  it('renders an error banner without crashing', () => {
    const model = withMalformed(initialViewModel(), 'payload missing own-role block');
    const root = renderDashboard(model);
    expect(root.querySelector('.error-banner')).not.toBeNull();
    expect(root.textContent).toContain('Bad data from server');
  });

  it('keeps the last good screen under a later malformed push', () => {
    let model = withPayload(initialViewModel(), restrictedPayload());
    model = withMalformed(model, 'unsupported schema version 9');
    const root = renderDashboard(model);
    expect(root.querySelector('.error-banner')).not.toBeNull();
    expect(root.querySelectorAll('.role-panel')).toHaveLength(1);
  });
});

describe('pure re-rendering', () => {
  it('replaying the same payload history reproduces the same screen', () => {
    const history = [restrictedPayload({ week_completed: 1 }), restrictedPayload()];
    const renderAll = () => {
      let model = initialViewModel();
      for (const payload of history) model = withPayload(model, payload);
      return renderDashboard(model).outerHTML;
    };
    expect(renderAll()).toBe(renderAll());
  });
});
