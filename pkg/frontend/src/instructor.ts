/**
 * Instructor console: chain-wide view of every seat plus run controls.
 *
 * The console always receives the full-information payload (it is the
 * operator, not a player) and offers start / advance / export.
 */

import { lineChart, SERIES_COLORS } from './chart.js';
import { connectPush, SessionClient } from './net.js';
import { OwnBlock, ViewPayload } from './protocol.js';

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

function roleCard(block: OwnBlock): HTMLElement {
  const card = el('div', 'panel role-panel instructor-role');
  card.dataset.role = block.role;
  card.appendChild(el('h3', 'panel-title', `${block.role} (${block.seat})`));
  card.appendChild(el('div', 'stat-row', `on hand ${block.on_hand} / backlog ${block.backlog}`));
  card.appendChild(el('div', 'stat-row instructor-cost', `cost ${block.cumulative_cost}`));
  const chart = lineChart(
    [
      { label: 'inventory', points: block.series.inventory, color: SERIES_COLORS.inventory },
      { label: 'backlog', points: block.series.backlog, color: SERIES_COLORS.backlog },
    ],
    { width: 260, height: 110 },
  );
  card.appendChild(chart);
  return card;
}

export function renderInstructor(
  payload: ViewPayload,
  controls: { onStart?: () => void; onAdvance?: () => void; exportUrl?: string } = {},
): HTMLElement {
  const root = el('div', 'dashboard instructor-dashboard');
  root.appendChild(el('h1', 'title', `Session ${payload.session_id} — ${payload.phase}`));

  const bar = el('div', 'control-bar');
  const start = el('button', 'control-start', 'Start') as HTMLButtonElement;
  start.disabled = payload.phase !== 'lobby';
  start.addEventListener('click', () => controls.onStart?.());
  const advance = el('button', 'control-advance', 'Advance week') as HTMLButtonElement;
  advance.disabled = payload.phase !== 'awaiting_orders';
  advance.addEventListener('click', () => controls.onAdvance?.());
  bar.appendChild(start);
  bar.appendChild(advance);
  if (controls.exportUrl) {
    const link = el('a', 'control-export', 'Export CSV') as HTMLAnchorElement;
    link.href = controls.exportUrl;
    bar.appendChild(link);
  }
  root.appendChild(bar);

  const grid = el('div', 'instructor-grid');
  for (const block of Object.values(payload.roles ?? {})) {
    grid.appendChild(roleCard(block));
  }
  root.appendChild(grid);

  if (payload.chain_order_series) {
    const box = el('figure', 'chart chart-chain-orders');
    box.appendChild(
      lineChart(
        Object.entries(payload.chain_order_series).map(([name, points]) => ({
          label: name,
          points,
          color: SERIES_COLORS[name] ?? '#444',
        })),
        { title: 'Weekly orders by role', width: 560, height: 180 },
      ),
    );
    root.appendChild(box);
  }
  return root;
}

export async function bootstrapInstructor(mount: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get('server') ?? window.location.origin;
  const client = new SessionClient(server, params.get('session'));
  if (client.sessionId === null) await client.createSession({});

  const draw = (payload: ViewPayload) => {
    mount.replaceChildren(
      renderInstructor(payload, {
        onStart: () => void client.start(),
        onAdvance: () => void client.advance(),
        exportUrl: `${client.baseUrl}/sessions/${client.sessionId}/export.csv`,
      }),
    );
  };
  draw(await client.view('instructor'));
  connectPush(client, 'instructor', { onPayload: draw });
}
