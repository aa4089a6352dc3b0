/**
 * Player app: join a seat, watch pushed views, place weekly orders.
 *
 * URL parameters: `?server=http://host:port&session=<id>&role=retailer
 * &name=<player>`.  Omitting `session` creates a fresh one (useful for
 * trying the client against a local server).
 */

import { connectPush, SessionClient, StaleTurnError } from './net.js';
import { renderDashboard } from './render.js';
import {
  initialViewModel,
  lockInput,
  setConnection,
  setQuantity,
  unlockWithWarning,
  ViewModel,
  withMalformed,
  withPayload,
} from './state.js';

export class PlayerApp {
  model: ViewModel = initialViewModel();

  constructor(
    readonly client: SessionClient,
    readonly role: string,
    readonly mount: HTMLElement,
  ) {}

  render(): void {
    const view = renderDashboard(this.model, {
      onQuantityChange: (value) => {
        this.model = setQuantity(this.model, value);
      },
      onSubmit: (quantity) => void this.submit(quantity),
    });
    this.mount.replaceChildren(view);
  }

  update(transform: (model: ViewModel) => ViewModel): void {
    this.model = transform(this.model);
    this.render();
  }

  async submit(quantity: number): Promise<void> {
    const payload = this.model.payload;
    if (payload === null || payload.current_week === null) return;
    const week = payload.current_week;
    this.update(lockInput);
    try {
      await this.client.submitOrder(week, quantity);
      // The pushed payload for the new week unlocks the entry; until it
      // arrives the control stays locked, which is the optimistic lock.
      this.update((model) => withPayload(model, { ...payload, own: payload.own && {
        ...payload.own,
        pending_submitted: true,
      } }));
    } catch (failure) {
      if (failure instanceof StaleTurnError) {
        this.update((model) => unlockWithWarning(model, `Turn already moved on: ${failure.message}`));
        await this.refresh();
      } else {
        const message = failure instanceof Error ? failure.message : String(failure);
        this.update((model) => unlockWithWarning(model, message));
      }
    }
  }

  async refresh(): Promise<void> {
    try {
      const payload = await this.client.view(this.role);
      this.update((model) => withPayload(model, payload));
    } catch (failure) {
      const message = failure instanceof Error ? failure.message : String(failure);
      this.update((model) => withMalformed(model, message));
    }
  }

  connect(): void {
    connectPush(this.client, this.role, {
      onPayload: (payload) => this.update((model) => withPayload(model, payload)),
      onMalformed: (message) => this.update((model) => withMalformed(model, message)),
      onStatus: (status) =>
        this.update((model) => setConnection(model, status === 'live' ? 'live' : 'closed')),
    });
  }
}

export async function bootstrapPlayer(mount: HTMLElement): Promise<PlayerApp> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get('server') ?? window.location.origin;
  const role = params.get('role') ?? 'retailer';
  const name = params.get('name') ?? 'player';
  const client = new SessionClient(server, params.get('session'));
  if (client.sessionId === null) {
    await client.createSession({});
  }
  const app = new PlayerApp(client, role, mount);
  await app.refresh();
  if (app.model.payload?.phase === 'lobby' && app.model.payload.seats[role]?.kind === 'agent') {
    await client.join(role, name);
    await app.refresh();
  }
  app.connect();
  return app;
}
