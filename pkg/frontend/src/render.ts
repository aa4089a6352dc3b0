/**
 * DOM rendering: the whole dashboard is rebuilt from the view-model.
 *
 * Panels are driven purely by which fields the payload carries -- a
 * restricted payload has no peer data, so no peer panel (and no peer
 * cost element) can ever render.
 */

import { ChartSeries, lineChart, SERIES_COLORS } from './chart.js';
import { OwnBlock, ViewPayload } from './protocol.js';
import { canSubmit, ViewModel } from './state.js';

export interface DashboardHandlers {
  onQuantityChange?: (value: string) => void;
  onSubmit?: (quantity: number) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function statRow(label: string, value: string, className?: string): HTMLElement {
  const row = el('div', 'stat-row');
  row.appendChild(el('span', 'stat-label', label));
  const v = el('span', className ? `stat-value ${className}` : 'stat-value', value);
  row.appendChild(v);
  return row;
}

function header(model: ViewModel): HTMLElement {
  const payload = model.payload as ViewPayload;
  const head = el('header', 'dashboard-header');
  head.appendChild(el('h1', 'title', `Beer game — ${payload.role}`));
  const status = el('div', 'status-line');
  status.appendChild(el('span', `phase phase-${payload.phase}`, payload.phase.replace('_', ' ')));
  const weekText =
    payload.phase === 'awaiting_orders' && payload.current_week !== null
      ? `week ${payload.current_week} of ${payload.horizon_weeks}`
      : `${payload.week_completed} of ${payload.horizon_weeks} weeks played`;
  status.appendChild(el('span', 'week-indicator', weekText));
  status.appendChild(el('span', `connection connection-${model.connection}`, model.connection));
  status.appendChild(el('span', 'visibility-badge', `${payload.visibility} visibility`));
  head.appendChild(status);
  return head;
}

function ownCharts(own: OwnBlock): HTMLElement {
  const wrap = el('div', 'charts');
  const stock: ChartSeries[] = [
    { label: 'inventory', points: own.series.inventory, color: SERIES_COLORS.inventory },
    { label: 'backlog', points: own.series.backlog, color: SERIES_COLORS.backlog },
  ];
  const flow: ChartSeries[] = [
    { label: 'order', points: own.series.order, color: SERIES_COLORS.order },
    { label: 'demand', points: own.series.demand, color: SERIES_COLORS.demand },
  ];
  const cost: ChartSeries[] = [
    {
      label: 'cum_cost',
      points: own.series.cum_cost.map(Number),
      color: SERIES_COLORS.cost,
    },
  ];
  const stockBox = el('figure', 'chart chart-stock');
  stockBox.appendChild(lineChart(stock, { title: 'Inventory and backlog' }));
  const flowBox = el('figure', 'chart chart-orders');
  flowBox.appendChild(lineChart(flow, { title: 'Orders and incoming demand' }));
  const costBox = el('figure', 'chart chart-cost');
  costBox.appendChild(lineChart(cost, { title: 'Cumulative cost' }));
  wrap.appendChild(stockBox);
  wrap.appendChild(flowBox);
  wrap.appendChild(costBox);
  return wrap;
}

function orderEntry(model: ViewModel, handlers: DashboardHandlers): HTMLElement {
  const payload = model.payload as ViewPayload;
  const own = payload.own as OwnBlock;
  const enabled = canSubmit(model);
  const form = el('div', 'order-entry');
  const input = el('input', 'order-input') as HTMLInputElement;
  input.type = 'number';
  input.min = '0';
  input.step = '1';
  input.value = model.input.quantity;
  input.disabled = !enabled;
  input.addEventListener('input', () => handlers.onQuantityChange?.(input.value));
  const button = el('button', 'order-submit', 'Place order') as HTMLButtonElement;
  button.disabled = !enabled;
  button.addEventListener('click', () => {
    const quantity = Number.parseInt(input.value, 10);
    if (!Number.isInteger(quantity) || quantity < 0) {
      handlers.onQuantityChange?.(input.value);
      return;
    }
    handlers.onSubmit?.(quantity);
  });
  form.appendChild(el('label', 'order-label', `Order for week ${payload.current_week ?? '—'}`));
  form.appendChild(input);
  form.appendChild(button);
  if (own.pending_submitted) {
    form.appendChild(el('span', 'order-waiting', 'submitted — waiting for the other seats'));
  } else if (model.input.locked) {
    form.appendChild(el('span', 'order-waiting', 'sending…'));
  }
  if (model.input.warning) {
    form.appendChild(el('span', 'order-warning', model.input.warning));
  }
  return form;
}

function ownPanel(model: ViewModel, handlers: DashboardHandlers): HTMLElement {
  const payload = model.payload as ViewPayload;
  const own = payload.own as OwnBlock;
  const panel = el('section', 'panel role-panel own-panel');
  panel.dataset.role = own.role;
  panel.appendChild(el('h2', 'panel-title', `${own.role} (${own.seat})`));
  const stats = el('div', 'stats');
  stats.appendChild(statRow('On hand', String(own.on_hand)));
  stats.appendChild(statRow('Backlog', String(own.backlog)));
  stats.appendChild(statRow('Inventory position', String(own.inventory_position)));
  stats.appendChild(statRow('Cumulative cost', own.cumulative_cost, 'own-cost'));
  panel.appendChild(stats);
  if (own.seat === 'human' && payload.phase !== 'finished') {
    panel.appendChild(orderEntry(model, handlers));
  }
  panel.appendChild(ownCharts(own));
  return panel;
}

function peersPanel(payload: ViewPayload): HTMLElement {
  const panel = el('section', 'panel peers-panel');
  panel.appendChild(el('h2', 'panel-title', 'Other roles'));
  const grid = el('div', 'peer-grid');
  for (const [name, peer] of Object.entries(payload.peers ?? {})) {
    const card = el('div', 'peer-panel');
    card.dataset.role = name;
    card.appendChild(el('h3', 'peer-name', name));
    card.appendChild(statRow('Cumulative cost', peer.cumulative_cost, 'peer-cost'));
    card.appendChild(statRow('Backlog', String(peer.backlog), 'peer-backlog'));
    card.appendChild(
      statRow('Orders placed', peer.order_history.slice(-8).join(', ') || '—', 'peer-orders'),
    );
    grid.appendChild(card);
  }
  panel.appendChild(grid);
  return panel;
}

function chainChart(payload: ViewPayload): HTMLElement {
  const panel = el('section', 'panel chain-panel');
  panel.appendChild(el('h2', 'panel-title', 'Order pattern, whole chain'));
  const series: ChartSeries[] = Object.entries(payload.chain_order_series ?? {}).map(
    ([name, points]) => ({
      label: name,
      points,
      color: SERIES_COLORS[name] ?? '#444',
    }),
  );
  const box = el('figure', 'chart chart-chain-orders');
  box.appendChild(lineChart(series, { title: 'Weekly orders by role', width: 520 }));
  panel.appendChild(box);
  return panel;
}

function summaryCard(payload: ViewPayload): HTMLElement {
  const summary = payload.run_summary!;
  const card = el('section', 'panel summary-card');
  card.appendChild(el('h2', 'panel-title', 'Final results'));
  const stats = el('div', 'stats');
  for (const [name, cost] of Object.entries(summary.role_total_cost)) {
    stats.appendChild(
      statRow(
        `${name} total cost`,
        `${cost} (order STD ${summary.role_order_std[name].toFixed(2)})`,
      ),
    );
  }
  stats.appendChild(statRow('Chain total cost', summary.chain_total_cost, 'chain-total'));
  stats.appendChild(statRow('Average order STD', summary.avg_order_std.toFixed(2)));
  card.appendChild(stats);
  return card;
}

function lobbyPanel(payload: ViewPayload): HTMLElement {
  const panel = el('section', 'panel lobby-panel');
  panel.appendChild(el('h2', 'panel-title', 'Waiting to start'));
  const list = el('ul', 'seat-list');
  for (const [name, seat] of Object.entries(payload.seats)) {
    const item = el(
      'li',
      `seat seat-${seat.kind}`,
      seat.kind === 'human' ? `${name}: ${seat.player_name ?? 'player'}` : `${name}: agent`,
    );
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

/** Build the full dashboard for the current view-model. */
export function renderDashboard(
  model: ViewModel,
  handlers: DashboardHandlers = {},
): HTMLElement {
  const root = el('div', 'dashboard');
  if (model.malformed !== null) {
    const banner = el('div', 'error-banner', `Bad data from server: ${model.malformed}`);
    root.appendChild(banner);
    if (model.payload === null) return root;
  }
  if (model.payload === null) {
    root.appendChild(el('div', 'loading', 'Connecting…'));
    return root;
  }
  const payload = model.payload;
  root.appendChild(header(model));
  if (payload.phase === 'lobby') root.appendChild(lobbyPanel(payload));
  if (payload.run_summary) root.appendChild(summaryCard(payload));
  if (payload.own) root.appendChild(ownPanel(model, handlers));
  if (payload.peers) root.appendChild(peersPanel(payload));
  if (payload.chain_order_series) root.appendChild(chainChart(payload));
  return root;
}
