// Round trips against a mock service: the page markup comes straight from
// index.html so these tests exercise the same ids and structure the browser
// gets, with fetch and the clock injected.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeEach, describe, expect, it } from "vitest";
import { initApp, type AppHandle } from "../src/app";
import type { FetchLike } from "../src/api";

const pageBody = (() => {
  const here = dirname(fileURLToPath(import.meta.url));
  const html = readFileSync(join(here, "..", "index.html"), "utf8");
  const body = html.slice(html.indexOf("<body>") + "<body>".length, html.indexOf("</body>"));
  return body.replace(/<script[\s\S]*?<\/script>/g, "");
})();

type Handler = () => Response | Promise<Response>;

function service(...handlers: Handler[]): { calls: { input: string; init?: RequestInit }[]; fetchFn: FetchLike } {
  const calls: { input: string; init?: RequestInit }[] = [];
  const queue = [...handlers];
  const fetchFn: FetchLike = (input, init) => {
    calls.push({ input, init });
    const next = queue.shift();
    if (!next) throw new Error(`unexpected request to ${input}`);
    return Promise.resolve(next());
  };
  return { calls, fetchFn };
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const greeting = {
  session_id: "s-1",
  reply: "hello, how may I help you?",
  matched_similarity: 1.0,
  goal_status: "InProgress",
  risk_level: "unknown",
};

const verdict = {
  label: "benign",
  subtype: "adenosis",
  class_names: ["benign", "malignant"],
  confidence: [0.8, 0.2],
  model_id: "breast-40x",
};

function mount(fetchFn: FetchLike): AppHandle {
  document.body.innerHTML = pageBody;
  return initApp(document, { fetchFn, now: () => "10:15:00" });
}

const el = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

function typeMessage(text: string): void {
  const input = el<HTMLInputElement>("chat-input");
  input.value = text;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

function submitChatForm(): void {
  el<HTMLFormElement>("chat-form").dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

function attachFile(name = "features.npz", type = "application/octet-stream"): void {
  const input = el<HTMLInputElement>("file-input");
  input.files = [new File(["payload"], name, { type })] as unknown as FileList;
  input.dispatchEvent(new Event("change", { bubbles: true }));
}

function optInEarly(): void {
  const box = el<HTMLInputElement>("opt-in");
  box.checked = true;
  box.dispatchEvent(new Event("change", { bubbles: true }));
}

function submitUploadForm(): void {
  el<HTMLFormElement>("upload-form").dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

const tick = (): Promise<void> => new Promise((resolve) => setTimeout(resolve, 0));

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("sending a message", () => {
  it("renders the user turn and the reply, in that order", async () => {
    const { calls, fetchFn } = service(() => json(greeting));
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();

    const rows = [...document.querySelectorAll("#transcript li")];
    expect(rows.map((li) => li.className)).toEqual(["msg msg-user", "msg msg-bot"]);
    expect(rows[0]?.querySelector(".msg-text")?.textContent).toBe("hello");
    expect(rows[1]?.querySelector(".msg-text")?.textContent).toBe(greeting.reply);
    expect(calls[0]?.input).toBe("/api/v1/chat");
    expect(el<HTMLInputElement>("chat-input").value).toBe("");
    expect(el<HTMLElement>("badges").textContent).toContain("InProgress");
  });

  it("matches the transcript snapshot after two exchanges", async () => {
    const followUp = { ...greeting, reply: "noted, go on", risk_level: "low" };
    const { fetchFn } = service(
      () => json(greeting),
      () => json(followUp),
    );
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();
    typeMessage("i found a lump in my left breast");
    submitChatForm();
    await tick();

    expect(document.querySelectorAll("#transcript li")).toHaveLength(4);
    expect(el<HTMLUListElement>("transcript").innerHTML).toMatchSnapshot();
  });

  it("disables the input while a request is in flight", async () => {
    let release!: (r: Response) => void;
    const gate = new Promise<Response>((resolve) => {
      release = resolve;
    });
    const { calls, fetchFn } = service(() => gate);
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();

    expect(el<HTMLInputElement>("chat-input").disabled).toBe(true);
    expect(el<HTMLButtonElement>("send-button").disabled).toBe(true);
    submitChatForm();
    await tick();
    expect(calls).toHaveLength(1);

    release(json(greeting));
    await tick();
    expect(el<HTMLInputElement>("chat-input").disabled).toBe(false);
    expect(document.querySelectorAll("#transcript li")).toHaveLength(2);
  });

  it("refuses to send an empty draft", async () => {
    const { calls, fetchFn } = service();
    mount(fetchFn);
    expect(el<HTMLButtonElement>("send-button").disabled).toBe(true);
    submitChatForm();
    await tick();
    expect(calls).toHaveLength(0);
  });
});

describe("when the service rejects a message", () => {
  it("keeps the draft, shows the detail, and leaves the transcript alone", async () => {
    const { fetchFn } = service(() => json({ detail: "consultation store offline" }, 500));
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();

    const banner = document.querySelector("#banner .banner-error");
    expect(banner?.textContent).toContain("consultation store offline");
    expect(el<HTMLInputElement>("chat-input").value).toBe("hello");
    expect(document.querySelector("#transcript .msg-user")).toBeNull();
  });

  it("retry resends the preserved draft", async () => {
    const { calls, fetchFn } = service(
      () => json({ detail: "consultation store offline" }, 500),
      () => json(greeting),
    );
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();

    el<HTMLButtonElement>("retry-send").click();
    await tick();

    expect(calls).toHaveLength(2);
    expect(document.querySelector("#banner .banner-error")).toBeNull();
    const rows = [...document.querySelectorAll("#transcript li")];
    expect(rows.map((li) => li.querySelector(".msg-text")?.textContent)).toEqual([
      "hello",
      greeting.reply,
    ]);
  });
});

describe("uploading features", () => {
  it("stays disabled until a file is picked and the gate opens", () => {
    const { fetchFn } = service();
    mount(fetchFn);
    const button = el<HTMLButtonElement>("upload-button");

    expect(button.disabled).toBe(true);
    attachFile();
    expect(button.disabled).toBe(true); // file alone is not enough
    optInEarly();
    expect(button.disabled).toBe(false);
  });

  it("unlocks without opt-in once the consultation completes", async () => {
    const done = { ...greeting, goal_status: "Completed", risk_level: "high" };
    const { fetchFn } = service(() => json(done));
    mount(fetchFn);

    typeMessage("yes");
    submitChatForm();
    await tick();
    attachFile();

    expect(el<HTMLButtonElement>("upload-button").disabled).toBe(false);
  });

  it("renders one confidence bar per class, matching the mock probabilities", async () => {
    const { calls, fetchFn } = service(() => json(verdict));
    mount(fetchFn);

    optInEarly();
    attachFile();
    submitUploadForm();
    await tick();

    expect(calls[0]?.input).toBe("/api/v1/classify?model_id=breast-40x");
    const diagnosis = el<HTMLElement>("diagnosis");
    expect(diagnosis.querySelector("h3")?.textContent).toBe("benign (adenosis)");
    const bars = [...diagnosis.querySelectorAll<HTMLElement>(".confidence-bar")];
    expect(bars.map((bar) => bar.style.width)).toEqual(["80.0%", "20.0%"]);
    const values = [...diagnosis.querySelectorAll(".confidence-value")];
    expect(values.map((v) => v.textContent)).toEqual(["80.0%", "20.0%"]);
    expect(diagnosis.innerHTML).toMatchSnapshot();
  });

  it("shows the rejection detail inline and chat keeps working", async () => {
    const { fetchFn } = service(
      () => json({ detail: "payload is not a loadable feature container" }, 400),
      () => json(greeting),
    );
    mount(fetchFn);

    optInEarly();
    attachFile("junk.bin");
    submitUploadForm();
    await tick();

    expect(el<HTMLElement>("upload-status").textContent).toContain(
      "payload is not a loadable feature container",
    );
    expect(el<HTMLElement>("diagnosis").innerHTML).toBe("");

    typeMessage("hello");
    submitChatForm();
    await tick();
    expect(document.querySelectorAll("#transcript li")).toHaveLength(2);
  });

  it("previews the file when it is a displayable image", () => {
    const { fetchFn } = service();
    mount(fetchFn);
    const hadCreate = typeof URL.createObjectURL === "function";
    if (!hadCreate) {
      (URL as unknown as { createObjectURL: (b: Blob) => string }).createObjectURL = () =>
        "blob:preview";
    }

    const preview = el<HTMLImageElement>("preview");
    expect(preview.hidden).toBe(true);
    attachFile("slide.png", "image/png");
    expect(preview.hidden).toBe(false);
    expect(preview.getAttribute("src")).toBeTruthy();

    attachFile("features.npz", "application/octet-stream");
    expect(preview.hidden).toBe(true);
  });
});

describe("session continuity", () => {
  it("sends the returned session id on the next turn", async () => {
    const { calls, fetchFn } = service(
      () => json(greeting),
      () => json({ ...greeting, reply: "noted" }),
    );
    mount(fetchFn);

    typeMessage("hello");
    submitChatForm();
    await tick();
    typeMessage("i am worried about breast cancer");
    submitChatForm();
    await tick();

    const second = JSON.parse(calls[1]?.init?.body as string) as Record<string, string>;
    expect(second.session_id).toBe("s-1");
  });
});
