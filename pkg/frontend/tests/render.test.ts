import { describe, expect, it } from "vitest";
import {
  escapeHtml,
  renderBadges,
  renderBanner,
  renderDiagnosis,
  renderTranscript,
  renderUploadError,
} from "../src/render";
import { initialState, type ChatViewState, type Diagnosis } from "../src/state";

function withMessages(): ChatViewState {
  return {
    ...initialState(),
    messages: [
      { speaker: "user", text: "hello", timestamp: "10:15:00" },
      { speaker: "bot", text: "hello, how may I help you?", timestamp: "10:15:00" },
    ],
    goalStatus: "InProgress",
    riskLevel: "unknown",
  };
}

describe("transcript", () => {
  it("renders an empty-state hint before the first turn", () => {
    expect(renderTranscript(initialState())).toMatchSnapshot();
  });

  it("renders both turns of an exchange in order", () => {
    const html = renderTranscript(withMessages());
    expect(html.indexOf("msg-user")).toBeGreaterThan(-1);
    expect(html.indexOf("msg-user")).toBeLessThan(html.indexOf("msg-bot"));
    expect(html).toMatchSnapshot();
  });

  it("escapes message text so markup cannot leak into the page", () => {
    const state = {
      ...initialState(),
      messages: [{ speaker: "user" as const, text: "<script>alert(1)</script>", timestamp: "t" }],
    };
    const html = renderTranscript(state);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("badges", () => {
  it("shows goal and risk once known", () => {
    const state = { ...initialState(), goalStatus: "Completed", riskLevel: "high" };
    expect(renderBadges(state)).toMatchSnapshot();
  });

  it("hides the risk badge while it is still unknown", () => {
    const html = renderBadges(withMessages());
    expect(html).toContain("InProgress");
    expect(html).not.toContain("unknown");
  });

  it("renders nothing before the first reply", () => {
    expect(renderBadges(initialState())).toBe("");
  });
});

describe("error banner", () => {
  it("carries the message and a retry control", () => {
    const state = { ...initialState(), banner: "consultation store offline" };
    const html = renderBanner(state);
    expect(html).toContain("consultation store offline");
    expect(html).toContain('id="retry-send"');
    expect(html).toMatchSnapshot();
  });

  it("is absent when there is no error", () => {
    expect(renderBanner(initialState())).toBe("");
  });
});

describe("diagnosis panel", () => {
  const result: Diagnosis = {
    label: "benign",
    subtype: "adenosis",
    classNames: ["benign", "malignant"],
    confidence: [0.8, 0.2],
    modelId: "breast-40x",
  };

  it("shows one bar per class, width tracking the probability", () => {
    const html = renderDiagnosis(result);
    expect(html).toContain("width: 80.0%");
    expect(html).toContain("width: 20.0%");
    expect(html).toContain(">80.0%<");
    expect(html).toContain(">20.0%<");
    expect(html).toMatchSnapshot();
  });

  it("formats percentages to one decimal", () => {
    const html = renderDiagnosis({ ...result, confidence: [0.6667, 0.3333] });
    expect(html).toContain("66.7%");
    expect(html).toContain("33.3%");
  });

  it("omits the subtype parenthetical when the model has none", () => {
    const html = renderDiagnosis({ ...result, subtype: null });
    expect(html).toContain(">benign<");
    expect(html).not.toContain("(");
  });

  it("renders nothing before any classification", () => {
    expect(renderDiagnosis(null)).toBe("");
  });
});

describe("upload error", () => {
  it("quotes the server detail verbatim", () => {
    const state = { ...initialState(), uploadError: "payload is not a feature container" };
    expect(renderUploadError(state)).toContain("payload is not a feature container");
  });

  it("escapes hostile detail strings", () => {
    const state = { ...initialState(), uploadError: '<img src=x onerror="x">' };
    expect(renderUploadError(state)).not.toContain("<img");
  });
});

describe("escapeHtml", () => {
  it("covers the five significant characters", () => {
    expect(escapeHtml(`<a href="x" title='y'>&</a>`)).toBe(
      "&lt;a href=&quot;x&quot; title=&#39;y&#39;&gt;&amp;&lt;/a&gt;",
    );
  });
});
