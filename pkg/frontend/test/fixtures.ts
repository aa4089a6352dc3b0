/** Payload builders for rendering tests. */

import { OwnBlock, RoleSeries, ViewPayload } from '../src/protocol.js';

export function series(partial: Partial<RoleSeries> = {}): RoleSeries {
  return {
    week: [1, 2],
    inventory: [12, 12],
    backlog: [0, 0],
    order: [4, 4],
    demand: [4, 4],
    week_cost: ['6.00', '6.00'],
    cum_cost: ['6.00', '12.00'],
    ...partial,
  };
}

export function ownBlock(partial: Partial<OwnBlock> = {}): OwnBlock {
  return {
    role: 'wholesaler',
    seat: 'human',
    policy: 'human',
    on_hand: 12,
    backlog: 0,
    inventory_position: 24,
    cumulative_cost: '12.00',
    demand_history: [4, 4],
    order_history: [4, 4],
    series: series(),
    pending_submitted: false,
    ...partial,
  };
}

export function restrictedPayload(partial: Partial<ViewPayload> = {}): ViewPayload {
  return {
    v: 1,
    session_id: 'abc123',
    phase: 'awaiting_orders',
    week_completed: 2,
    current_week: 3,
    horizon_weeks: 24,
    visibility: 'restricted',
    seats: {
      retailer: { kind: 'agent' },
      wholesaler: { kind: 'human', player_name: 'casey' },
      distributor: { kind: 'agent' },
      factory: { kind: 'agent' },
    },
    role: 'wholesaler',
    own: ownBlock(),
    ...partial,
  };
}

export function fullPayload(partial: Partial<ViewPayload> = {}): ViewPayload {
  return restrictedPayload({
    visibility: 'full',
    peers: {
      retailer: { cumulative_cost: '10.00', backlog: 0, order_history: [4, 4] },
      distributor: { cumulative_cost: '14.00', backlog: 2, order_history: [4, 5] },
      factory: { cumulative_cost: '15.50', backlog: 0, order_history: [4, 6] },
    },
    end_customer_demand_stats: { avg: 4.0, std: 2.0 },
    chain_order_series: {
      retailer: [4, 4],
      wholesaler: [4, 4],
      distributor: [4, 5],
      factory: [4, 6],
    },
    chain_cost_series: {
      retailer: ['6.00', '10.00'],
      wholesaler: ['6.00', '12.00'],
      distributor: ['7.00', '14.00'],
      factory: ['8.00', '15.50'],
    },
    ...partial,
  });
}

export function finishedPayload(): ViewPayload {
  return restrictedPayload({
    phase: 'finished',
    current_week: null,
    week_completed: 24,
    run_summary: {
      role_total_cost: {
        retailer: '200.00',
        wholesaler: '241.00',
        distributor: '312.00',
        factory: '314.00',
      },
      role_order_std: { retailer: 4.93, wholesaler: 2.8, distributor: 4.84, factory: 4.84 },
      chain_total_cost: '1067.00',
      avg_order_std: 4.3525,
    },
  });
}

/**
 * The three-week hand-checked ledger for the wholesaler seat, mirrored
 * from the engine's frozen trace: demand [4,0,0], holdings 12/16/20.
 */
export function handTracePayload(): ViewPayload {
  return restrictedPayload({
    week_completed: 3,
    current_week: 4,
    own: ownBlock({
      on_hand: 20,
      backlog: 0,
      cumulative_cost: '24.00',
      demand_history: [4, 0, 0],
      order_history: [0, 0, 0],
      series: {
        week: [1, 2, 3],
        inventory: [12, 16, 20],
        backlog: [0, 0, 0],
        order: [0, 0, 0],
        demand: [4, 0, 0],
        week_cost: ['6.00', '8.00', '10.00'],
        cum_cost: ['6.00', '14.00', '24.00'],
      },
    }),
  });
}
