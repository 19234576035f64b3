import { GatewayClient } from './api.js';
import { ChatModel } from './model.js';
import { mountChatWidget } from './widget.js';

declare global {
  interface Window {
    CLARIFIER_BASE_URL?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const baseUrl =
  params.get('gateway') ?? window.CLARIFIER_BASE_URL ?? 'http://127.0.0.1:8000';

const root = document.getElementById('chat');
if (!root) {
  throw new Error('missing #chat element');
}
const model = new ChatModel(new GatewayClient(baseUrl));
mountChatWidget(root, model);
void model.start();
