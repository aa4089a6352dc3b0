/**
 * Wire types for the session server (schema version 1).
 *
 * Payloads are visibility-gated on the server: restricted views simply do
 * not carry `peers`, demand statistics, or chain series.  The client
 * therefore renders whatever fields exist and never filters locally.
 */

export const PROTOCOL_VERSION = 1;

export type Phase = 'lobby' | 'awaiting_orders' | 'finished';
export type Visibility = 'full' | 'restricted';
export type RoleName = 'retailer' | 'wholesaler' | 'distributor' | 'factory';

export const ROLE_NAMES: RoleName[] = ['retailer', 'wholesaler', 'distributor', 'factory'];

export interface SeatInfo {
  kind: 'agent' | 'human';
  player_name?: string;
}

export interface RoleSeries {
  week: number[];
  inventory: number[];
  backlog: number[];
  order: number[];
  demand: number[];
  week_cost: string[];
  cum_cost: string[];
}

export interface OwnBlock {
  role: RoleName;
  seat: 'agent' | 'human';
  policy: string;
  on_hand: number;
  backlog: number;
  inventory_position: number;
  cumulative_cost: string;
  demand_history: number[];
  order_history: number[];
  series: RoleSeries;
  pending_submitted: boolean;
}

export interface PeerBlock {
  cumulative_cost: string;
  backlog: number;
  order_history: number[];
}

export interface RunSummaryBlock {
  role_total_cost: Record<string, string>;
  role_order_std: Record<string, number>;
  chain_total_cost: string;
  avg_order_std: number;
}

export interface ViewPayload {
  v: number;
  session_id: string;
  phase: Phase;
  week_completed: number;
  current_week: number | null;
  horizon_weeks: number;
  visibility: Visibility;
  seats: Record<string, SeatInfo>;
  role: string;
  own?: OwnBlock;
  roles?: Record<string, OwnBlock>;
  peers?: Record<string, PeerBlock>;
  end_customer_demand_stats?: { avg: number; std: number };
  chain_order_series?: Record<string, number[]>;
  chain_cost_series?: Record<string, string[]>;
  run_summary?: RunSummaryBlock;
}

export class ProtocolError extends Error {}

const PHASES: Phase[] = ['lobby', 'awaiting_orders', 'finished'];

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

function checkSeries(series: unknown): series is RoleSeries {
  if (!isRecord(series)) return false;
  const keys = ['week', 'inventory', 'backlog', 'order', 'demand', 'week_cost', 'cum_cost'];
  return keys.every((key) => Array.isArray(series[key]));
}

function checkOwnBlock(block: unknown): block is OwnBlock {
  if (!isRecord(block)) return false;
  return (
    typeof block.role === 'string' &&
    typeof block.on_hand === 'number' &&
    typeof block.backlog === 'number' &&
    typeof block.cumulative_cost === 'string' &&
    Array.isArray(block.order_history) &&
    checkSeries(block.series)
  );
}

/** Validate an incoming message; throws ProtocolError on malformed data. */
export function parseViewPayload(data: unknown): ViewPayload {
  if (!isRecord(data)) throw new ProtocolError('payload is not an object');
  if (data.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported schema version ${String(data.v)}`);
  }
  if (typeof data.session_id !== 'string') throw new ProtocolError('missing session_id');
  if (!PHASES.includes(data.phase as Phase)) {
    throw new ProtocolError(`unknown phase ${String(data.phase)}`);
  }
  if (typeof data.week_completed !== 'number') throw new ProtocolError('missing week_completed');
  if (typeof data.horizon_weeks !== 'number') throw new ProtocolError('missing horizon_weeks');
  if (data.visibility !== 'full' && data.visibility !== 'restricted') {
    throw new ProtocolError(`unknown visibility ${String(data.visibility)}`);
  }
  if (typeof data.role !== 'string') throw new ProtocolError('missing role');
  if (data.role === 'instructor') {
    if (!isRecord(data.roles) || !Object.values(data.roles).every(checkOwnBlock)) {
      throw new ProtocolError('instructor payload missing role blocks');
    }
  } else if (!checkOwnBlock(data.own)) {
    throw new ProtocolError('payload missing own-role block');
  }
  return data as unknown as ViewPayload;
}

export interface OrderAck {
  v: number;
  status: 'accepted' | 'duplicate';
  week: number;
  accepted_quantity: number;
  phase?: Phase;
}

export interface ServerErrorBody {
  code: string;
  message: string;
}
