// Event wiring between the DOM, the state transitions, and the API client.
// All server access goes through the two documented endpoints (chat and
// classify); the session view endpoint is read-only and unused here.

import { classifyFeatures, sendChat, ApiError, type FetchLike } from "./api";
import {
  beginSend,
  beginUpload,
  canSend,
  canUpload,
  completeSend,
  completeUpload,
  failSend,
  failUpload,
  initialState,
  setDraft,
  setUploadOptIn,
  type ChatViewState,
} from "./state";
import {
  renderBadges,
  renderBanner,
  renderDiagnosis,
  renderTranscript,
  renderUploadError,
} from "./render";

export interface AppDeps {
  fetchFn?: FetchLike;
  now?: () => string;
}

export interface AppHandle {
  getState(): ChatViewState;
}

function defaultNow(): string {
  return new Date().toISOString().slice(11, 19);
}

function messageFor(error: unknown): string {
  if (error instanceof ApiError) return error.detail;
  if (error instanceof Error) return `network error: ${error.message}`;
  return String(error);
}

export function initApp(doc: Document, deps: AppDeps = {}): AppHandle {
  const fetchFn = deps.fetchFn ?? ((input, init) => fetch(input, init));
  const now = deps.now ?? defaultNow;

  const transcript = doc.getElementById("transcript") as HTMLUListElement;
  const badges = doc.getElementById("badges") as HTMLElement;
  const bannerHost = doc.getElementById("banner") as HTMLElement;
  const chatForm = doc.getElementById("chat-form") as HTMLFormElement;
  const chatInput = doc.getElementById("chat-input") as HTMLInputElement;
  const sendButton = doc.getElementById("send-button") as HTMLButtonElement;
  const uploadForm = doc.getElementById("upload-form") as HTMLFormElement;
  const fileInput = doc.getElementById("file-input") as HTMLInputElement;
  const modelInput = doc.getElementById("model-input") as HTMLInputElement;
  const optInBox = doc.getElementById("opt-in") as HTMLInputElement;
  const uploadButton = doc.getElementById("upload-button") as HTMLButtonElement;
  const uploadStatus = doc.getElementById("upload-status") as HTMLElement;
  const diagnosisHost = doc.getElementById("diagnosis") as HTMLElement;
  const preview = doc.getElementById("preview") as HTMLImageElement;

  let state = initialState();

  function render(): void {
    transcript.innerHTML = renderTranscript(state);
    transcript.scrollTop = transcript.scrollHeight;
    badges.innerHTML = renderBadges(state);
    bannerHost.innerHTML = renderBanner(state);
    diagnosisHost.innerHTML = renderDiagnosis(state.diagnosis);
    uploadStatus.innerHTML = renderUploadError(state);
    if (state.uploadPending) {
      uploadStatus.textContent = "classifying…";
    }
    chatInput.value = state.draft;
    chatInput.disabled = state.sending;
    sendButton.disabled = !canSend(state);
    const hasFile = fileInput.files !== null && fileInput.files.length > 0;
    uploadButton.disabled = !canUpload(state) || !hasFile;
    const retry = doc.getElementById("retry-send");
    if (retry) retry.addEventListener("click", () => void submitChat());
  }

  function update(next: ChatViewState): void {
    state = next;
    render();
  }

  async function submitChat(): Promise<void> {
    if (!canSend(state)) return;
    const text = state.draft.trim();
    update(beginSend(state));
    try {
      const response = await sendChat(text, state.sessionId, fetchFn);
      update(completeSend(state, text, response, now()));
      chatInput.focus();
    } catch (error) {
      update(failSend(state, text, messageFor(error)));
    }
  }

  async function submitUpload(): Promise<void> {
    const file = fileInput.files?.[0];
    if (!file || !canUpload(state)) return;
    update(beginUpload(state));
    try {
      const response = await classifyFeatures(file, modelInput.value.trim(), fetchFn);
      update(completeUpload(state, response));
    } catch (error) {
      update(failUpload(state, messageFor(error)));
    }
  }

  function refreshPreview(): void {
    const file = fileInput.files?.[0];
    const displayable =
      file !== undefined &&
      file.type.startsWith("image/") &&
      typeof URL.createObjectURL === "function";
    if (displayable) {
      preview.src = URL.createObjectURL(file);
      preview.hidden = false;
    } else {
      preview.removeAttribute("src");
      preview.hidden = true;
    }
  }

  chatInput.addEventListener("input", () => {
    state = setDraft(state, chatInput.value);
    sendButton.disabled = !canSend(state);
  });
  chatForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitChat();
  });
  optInBox.addEventListener("change", () => {
    update(setUploadOptIn(state, optInBox.checked));
  });
  fileInput.addEventListener("change", () => {
    refreshPreview();
    render();
  });
  uploadForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitUpload();
  });

  render();
  return { getState: () => state };
}
