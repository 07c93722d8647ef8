// HTML fragments as pure functions of the view state. No DOM reads, no
// event wiring; app.ts assigns these strings to fixed regions.

import type { ChatViewState, Diagnosis, Message } from "./state";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function renderMessage(message: Message): string {
  const who = message.speaker === "user" ? "You" : "Bot";
  return (
    `<li class="msg msg-${message.speaker}">` +
    `<span class="msg-speaker">${who}</span>` +
    `<span class="msg-text">${escapeHtml(message.text)}</span>` +
    `<time class="msg-time">${escapeHtml(message.timestamp)}</time>` +
    `</li>`
  );
}

export function renderTranscript(state: ChatViewState): string {
  if (state.messages.length === 0) {
    return `<li class="msg msg-empty">Say hello to start the consultation.</li>`;
  }
  return state.messages.map(renderMessage).join("\n");
}

export function renderBadges(state: ChatViewState): string {
  const parts: string[] = [];
  if (state.goalStatus !== null) {
    const modifier = state.goalStatus.toLowerCase();
    parts.push(`<span class="badge badge-goal badge-${modifier}">${escapeHtml(state.goalStatus)}</span>`);
  }
  if (state.riskLevel !== null && state.riskLevel !== "unknown") {
    parts.push(
      `<span class="badge badge-risk badge-${escapeHtml(state.riskLevel)}">risk: ${escapeHtml(state.riskLevel)}</span>`,
    );
  }
  return parts.join(" ");
}

export function renderBanner(state: ChatViewState): string {
  if (state.banner === null) return "";
  return (
    `<div class="banner banner-error" role="alert">` +
    `<span>${escapeHtml(state.banner)}</span>` +
    `<button type="button" id="retry-send">Retry</button>` +
    `</div>`
  );
}

/** Per-class confidence bars; percentages shown to one decimal. */
export function renderDiagnosis(diagnosis: Diagnosis | null): string {
  if (diagnosis === null) return "";
  const heading = diagnosis.subtype
    ? `${diagnosis.label} (${diagnosis.subtype})`
    : diagnosis.label;
  const bars = diagnosis.classNames
    .map((name, i) => {
      const value = diagnosis.confidence[i] ?? 0;
      const percent = (value * 100).toFixed(1);
      return (
        `<div class="confidence-row">` +
        `<span class="confidence-label">${escapeHtml(name)}</span>` +
        `<div class="confidence-track">` +
        `<div class="confidence-bar" style="width: ${percent}%"></div>` +
        `</div>` +
        `<span class="confidence-value">${percent}%</span>` +
        `</div>`
      );
    })
    .join("\n");
  return (
    `<h3 class="diagnosis-label">${escapeHtml(heading)}</h3>\n` +
    `${bars}\n` +
    `<p class="diagnosis-model">model: ${escapeHtml(diagnosis.modelId)}</p>`
  );
}

export function renderUploadError(state: ChatViewState): string {
  if (state.uploadError === null) return "";
  return `<p class="upload-error" role="alert">${escapeHtml(state.uploadError)}</p>`;
}
