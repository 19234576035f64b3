// DOM renderer: binds a ChatModel to a root element.

import { ChatModel, UiSessionView } from './model.js';

export function mountChatWidget(root: HTMLElement, model: ChatModel): void {
  root.classList.add('clarifier-chat');
  root.innerHTML = `
    <div class="banner" data-role="error" hidden></div>
    <ul class="transcript" data-role="transcript"></ul>
    <div class="badge" data-role="badge" hidden></div>
    <div class="options" data-role="options"></div>
    <form class="composer" data-role="composer">
      <input type="text" data-role="input" placeholder="Type a message" autocomplete="off" />
      <button type="submit" data-role="send">Send</button>
    </form>
  `;

  const banner = root.querySelector<HTMLElement>('[data-role=error]')!;
  const transcript = root.querySelector<HTMLUListElement>('[data-role=transcript]')!;
  const badge = root.querySelector<HTMLElement>('[data-role=badge]')!;
  const options = root.querySelector<HTMLElement>('[data-role=options]')!;
  const composer = root.querySelector<HTMLFormElement>('[data-role=composer]')!;
  const input = root.querySelector<HTMLInputElement>('[data-role=input]')!;
  const send = root.querySelector<HTMLButtonElement>('[data-role=send]')!;

  composer.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = '';
    void model.send(text);
  });

  model.subscribe((view) => render(view));

  function render(view: UiSessionView): void {
    banner.hidden = view.error === null;
    banner.textContent = view.error ?? '';

    transcript.replaceChildren(
      ...view.messages.map((entry) => {
        const item = document.createElement('li');
        item.className = `message ${entry.speaker}`;
        item.textContent = entry.text;
        return item;
      }),
    );

    if (view.terminal) {
      badge.hidden = false;
      badge.textContent =
        view.terminal.kind === 'final'
          ? `intent: ${view.terminal.intent}` +
            (Number.isNaN(view.terminal.confidence)
              ? ''
              : ` (confidence ${view.terminal.confidence.toFixed(3)})`)
          : `no matching intent: ${view.terminal.reason}`;
    } else {
      badge.hidden = true;
      badge.textContent = '';
    }

    options.replaceChildren();
    if (view.pendingOptions) {
      for (const text of [view.pendingOptions.optionA, view.pendingOptions.optionB]) {
        const button = document.createElement('button');
        button.type = 'button';
        button.className = 'option';
        button.textContent = text;
        button.addEventListener('click', () => void model.clickOption(text));
        options.appendChild(button);
      }
      const none = document.createElement('button');
      none.type = 'button';
      none.className = 'none';
      none.textContent = view.pendingOptions.noneLabel;
      none.addEventListener('click', () => void model.clickNone());
      options.appendChild(none);
    }

    input.disabled = !view.inputEnabled;
    send.disabled = !view.inputEnabled;
  }
}
