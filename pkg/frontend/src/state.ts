/**
 * Client view-model: the last accepted payload plus local input state.
 *
 * Every transition is a pure function returning a fresh model, so the
 * rendered screen is a pure function of (last payload, input state) and
 * replaying a session's payload history reproduces the same screens.
 */

import { ViewPayload } from './protocol.js';

export type ConnectionStatus = 'connecting' | 'live' | 'polling' | 'closed';

export interface InputState {
  quantity: string;
  locked: boolean;
  warning: string | null;
}

export interface ViewModel {
  payload: ViewPayload | null;
  malformed: string | null;
  input: InputState;
  connection: ConnectionStatus;
}

export function initialViewModel(): ViewModel {
  return {
    payload: null,
    malformed: null,
    input: { quantity: '', locked: false, warning: null },
    connection: 'connecting',
  };
}

/** Accept a payload; a newly completed week unlocks the order entry. */
export function withPayload(model: ViewModel, payload: ViewPayload): ViewModel {
  const weekAdvanced =
    model.payload === null || payload.week_completed > model.payload.week_completed;
  return {
    ...model,
    payload,
    malformed: null,
    input: weekAdvanced
      ? { quantity: '', locked: false, warning: null }
      : model.input,
  };
}

export function withMalformed(model: ViewModel, message: string): ViewModel {
  return { ...model, malformed: message };
}

export function setQuantity(model: ViewModel, quantity: string): ViewModel {
  return { ...model, input: { ...model.input, quantity } };
}

/** Optimistic lock while a submission is in flight. */
export function lockInput(model: ViewModel): ViewModel {
  return { ...model, input: { ...model.input, locked: true, warning: null } };
}

/** A rejected submission unlocks the entry and surfaces the reason. */
export function unlockWithWarning(model: ViewModel, warning: string): ViewModel {
  return { ...model, input: { ...model.input, locked: false, warning } };
}

export function setConnection(model: ViewModel, connection: ConnectionStatus): ViewModel {
  return { ...model, connection };
}

/** Whether the order entry control should accept input right now. */
export function canSubmit(model: ViewModel): boolean {
  const payload = model.payload;
  if (payload === null || payload.phase !== 'awaiting_orders') return false;
  if (payload.own === undefined || payload.own.seat !== 'human') return false;
  if (payload.own.pending_submitted) return false;
  return !model.input.locked;
}
