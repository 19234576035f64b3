// View model for one chat session. Holds no DOM; the widget renders it.
//
// Every decision comes from the gateway: option clicks post their verbatim
// text so the server-side resolution path is identical for clicks and typed
// replies, and the rendered transcript is re-synced from the server after
// each interaction.

import { GatewayClient, GatewayError, ReplyOut, TranscriptEntry } from './api.js';

export interface PendingOptions {
  optionA: string;
  optionB: string;
  noneLabel: string;
}

export type TerminalBadge =
  | { kind: 'final'; intent: string; confidence: number }
  | { kind: 'rejected'; reason: string };

export interface UiSessionView {
  sessionId: string | null;
  messages: TranscriptEntry[];
  pendingOptions: PendingOptions | null;
  terminal: TerminalBadge | null;
  busy: boolean;
  error: string | null;
  inputEnabled: boolean;
}

export const NONE_REPLY_TEXT = 'none of them';
export const NONE_BUTTON_LABEL = 'None of these';

type Listener = (view: UiSessionView) => void;

export class ChatModel {
  private sessionId: string | null = null;
  private messages: TranscriptEntry[] = [];
  private pendingOptions: PendingOptions | null = null;
  private terminal: TerminalBadge | null = null;
  private busy = false;
  private error: string | null = null;
  private listeners: Listener[] = [];

  constructor(private readonly client: GatewayClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.view());
  }

  view(): UiSessionView {
    return {
      sessionId: this.sessionId,
      messages: [...this.messages],
      pendingOptions: this.pendingOptions ? { ...this.pendingOptions } : null,
      terminal: this.terminal,
      busy: this.busy,
      error: this.error,
      inputEnabled:
        this.sessionId !== null && !this.busy && this.terminal === null && this.error === null,
    };
  }

  private notify(): void {
    const snapshot = this.view();
    for (const listener of this.listeners) {
      listener(snapshot);
    }
  }

  async start(): Promise<void> {
    this.busy = true;
    this.error = null;
    this.notify();
    try {
      const created = await this.client.createSession();
      this.sessionId = created.session_id;
      this.messages = [];
      this.pendingOptions = null;
      this.terminal = null;
    } catch (err) {
      this.error = describe(err);
      this.sessionId = null;
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  async send(text: string): Promise<void> {
    if (!this.sessionId || this.busy || this.terminal) {
      return;
    }
    const trimmed = text.trim();
    if (!trimmed) {
      return;
    }
    this.busy = true;
    this.error = null;
    this.notify();
    try {
      const reply = await this.client.sendMessage(this.sessionId, trimmed);
      this.applyReply(reply);
      await this.refreshTranscript();
    } catch (err) {
      if (err instanceof GatewayError && err.status === 409) {
        // Session closed under us: the transcript is the source of truth.
        await this.refreshTranscript();
      } else {
        this.error = describe(err);
      }
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  clickOption(optionText: string): Promise<void> {
    return this.send(optionText);
  }

  clickNone(): Promise<void> {
    return this.send(NONE_REPLY_TEXT);
  }

  private applyReply(reply: ReplyOut): void {
    if (reply.kind === 'clarify' && reply.options && reply.options.length === 2) {
      this.pendingOptions = {
        optionA: reply.options[0]!.text,
        optionB: reply.options[1]!.text,
        noneLabel: NONE_BUTTON_LABEL,
      };
      this.terminal = null;
    } else if (reply.kind === 'final') {
      this.pendingOptions = null;
      this.terminal = {
        kind: 'final',
        intent: reply.intent ?? '',
        confidence: reply.confidence ?? 0,
      };
    } else if (reply.kind === 'rejected') {
      this.pendingOptions = null;
      this.terminal = { kind: 'rejected', reason: reply.reason ?? '' };
    }
  }

  private async refreshTranscript(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    const view = await this.client.getSession(this.sessionId);
    this.messages = view.transcript;
    if (view.state === 'closed' && this.terminal === null) {
      this.terminal = view.final_intent
        ? { kind: 'final', intent: view.final_intent, confidence: NaN }
        : { kind: 'rejected', reason: 'session closed' };
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof GatewayError) {
    return `gateway error ${err.status}`;
  }
  return err instanceof Error ? err.message : String(err);
}
