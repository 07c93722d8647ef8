// View state and its transitions. Every function here is pure: it takes a
// state and returns a new one, which keeps the transcript renderable (and
// snapshot-testable) as a plain function of the state object.

import type { ChatResponse, ClassifyResponse } from "./api";

export type Speaker = "user" | "bot";

export interface Message {
  speaker: Speaker;
  text: string;
  timestamp: string;
}

export interface Diagnosis {
  label: string;
  subtype: string | null;
  classNames: string[];
  confidence: number[];
  modelId: string;
}

export interface ChatViewState {
  sessionId: string | null;
  messages: Message[];
  goalStatus: string | null;
  riskLevel: string | null;
  draft: string;
  /** one in-flight chat request per session, enforced client-side */
  sending: boolean;
  banner: string | null;
  uploadPending: boolean;
  uploadOptIn: boolean;
  uploadError: string | null;
  diagnosis: Diagnosis | null;
}

export function initialState(): ChatViewState {
  return {
    sessionId: null,
    messages: [],
    goalStatus: null,
    riskLevel: null,
    draft: "",
    sending: false,
    banner: null,
    uploadPending: false,
    uploadOptIn: false,
    uploadError: null,
    diagnosis: null,
  };
}

export function setDraft(state: ChatViewState, draft: string): ChatViewState {
  return { ...state, draft };
}

export function canSend(state: ChatViewState): boolean {
  return state.draft.trim().length > 0 && !state.sending;
}

export function beginSend(state: ChatViewState): ChatViewState {
  return { ...state, sending: true, banner: null };
}

/** Acknowledged turn: append both messages and refresh the badges. */
export function completeSend(
  state: ChatViewState,
  text: string,
  response: ChatResponse,
  timestamp: string,
): ChatViewState {
  return {
    ...state,
    sessionId: response.session_id,
    messages: [
      ...state.messages,
      { speaker: "user", text, timestamp },
      { speaker: "bot", text: response.reply, timestamp },
    ],
    goalStatus: response.goal_status,
    riskLevel: response.risk_level,
    draft: "",
    sending: false,
    banner: null,
  };
}

/** Failed turn: no transcript mutation, the draft stays in the box. */
export function failSend(
  state: ChatViewState,
  text: string,
  message: string,
): ChatViewState {
  return { ...state, sending: false, draft: text, banner: message };
}

export function dismissBanner(state: ChatViewState): ChatViewState {
  return { ...state, banner: null };
}

export function setUploadOptIn(state: ChatViewState, optIn: boolean): ChatViewState {
  return { ...state, uploadOptIn: optIn };
}

/** Upload is gated on a finished consultation unless the user opts in. */
export function canUpload(state: ChatViewState): boolean {
  return (state.goalStatus === "Completed" || state.uploadOptIn) && !state.uploadPending;
}

export function beginUpload(state: ChatViewState): ChatViewState {
  return { ...state, uploadPending: true, uploadError: null };
}

export function completeUpload(
  state: ChatViewState,
  response: ClassifyResponse,
): ChatViewState {
  return {
    ...state,
    uploadPending: false,
    uploadError: null,
    diagnosis: {
      label: response.label,
      subtype: response.subtype,
      classNames: response.class_names,
      confidence: response.confidence,
      modelId: response.model_id,
    },
  };
}

export function failUpload(state: ChatViewState, message: string): ChatViewState {
  return { ...state, uploadPending: false, uploadError: message };
}
