import { execFile } from "node:child_process";
import { existsSync, readFileSync } from "node:fs";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

export type BackendKind = "http-endpoint" | "local-runtime" | "mock";

export type MockMode =
  | "wellformed" // generation output that satisfies every string check
  | "violate-filler" // leaks the context word into a filler sentence
  | "echo" // transcribes exactly the reference
  | "swap" // transcribes the context word where the acoustic word was spoken
  | "empty"; // returns an empty completion

export interface BackendConfig {
  kind: BackendKind;
  model: string;
  endpoint?: string;
  apiKey?: string;
  command?: string[];
  temperature: number;
  maxTokens?: number;
  timeoutMs: number;
  maxRetries: number;
  mockMode?: MockMode;
}

export const DEFAULT_CONFIG: Omit<BackendConfig, "kind"> = {
  model: "unknown",
  temperature: 0, // greedy decoding unless overridden
  timeoutMs: 120_000,
  maxRetries: 2,
};

/** What a completion is for; the mock backend keys its behavior off this. */
export type RequestPurpose = "sentence" | "fillers" | "transcribe";

export interface CompletionRequest {
  purpose: RequestPurpose;
  system?: string;
  user: string;
  audioPath?: string;
  meta: {
    itemId?: string;
    word?: string;
    nSentences?: number;
    acousticWord?: string;
    contextWord?: string;
    referenceTranscript?: string;
  };
}

export interface Backend {
  readonly config: BackendConfig;
  complete(req: CompletionRequest): Promise<string>;
}

export async function withRetries<T>(
  attempt: (tryNumber: number) => Promise<T>,
  maxRetries: number,
  label: string,
): Promise<T> {
  let lastError: unknown;
  for (let tryNumber = 0; tryNumber <= maxRetries; tryNumber++) {
    try {
      return await attempt(tryNumber);
    } catch (err) {
      lastError = err;
    }
  }
  throw new Error(`${label} failed after ${maxRetries + 1} attempt(s): ${lastError}`);
}

/** Offline stand-in so the whole pipeline is testable without a model. */
export class MockBackend implements Backend {
  constructor(readonly config: BackendConfig) {}

  async complete(req: CompletionRequest): Promise<string> {
    const mode = this.config.mockMode ?? "wellformed";
    if (mode === "empty") return "";
    if (req.purpose === "sentence") {
      return `A short line that mentions ${req.meta.word} naturally.`;
    }
    if (req.purpose === "fillers") {
      const n = req.meta.nSentences ?? 9;
      const lines: string[] = [];
      for (let i = 1; i <= n; i++) {
        lines.push(`Neutral filler sentence number ${i} about the topic.`);
      }
      if (mode === "violate-filler" && n > 0) {
        lines[n - 1] = `This filler wrongly mentions ${req.meta.contextWord}.`;
      }
      return lines.join("\n");
    }
    const reference = req.meta.referenceTranscript ?? "";
    if (mode === "swap" && req.meta.acousticWord && req.meta.contextWord) {
      return swapWord(reference, req.meta.acousticWord, req.meta.contextWord);
    }
    return reference;
  }
}

function swapWord(text: string, acousticWord: string, contextWord: string): string {
  const pattern = acousticWord
    .split(/\s+/)
    .map((t) => t.replace(/[.*+?^${}()|[\]\\]/g, "\\$&"))
    .join("\\s+");
  return text.replace(new RegExp(`\\b${pattern}\\b`, "gi"), contextWord);
}

interface ChatMessage {
  role: "system" | "user";
  content: unknown;
}

/** OpenAI-style chat-completions client over global fetch. */
export class HttpBackend implements Backend {
  constructor(readonly config: BackendConfig) {
    if (!config.endpoint) {
      throw new Error("http-endpoint backend needs --endpoint or $ADAPTER_ENDPOINT");
    }
  }

  async complete(req: CompletionRequest): Promise<string> {
    const messages: ChatMessage[] = [];
    if (req.system) messages.push({ role: "system", content: req.system });
    if (req.audioPath) {
      const audio = readFileSync(req.audioPath);
      messages.push({
        role: "user",
        content: [
          { type: "text", text: req.user },
          {
            type: "input_audio",
            input_audio: { data: audio.toString("base64"), format: "wav" },
          },
        ],
      });
    } else {
      messages.push({ role: "user", content: req.user });
    }
    const body: Record<string, unknown> = {
      model: this.config.model,
      messages,
      temperature: this.config.temperature,
    };
    if (this.config.maxTokens !== undefined) body.max_tokens = this.config.maxTokens;
    const headers: Record<string, string> = {
      "content-type": "application/json",
    };
    if (this.config.apiKey) headers.authorization = `Bearer ${this.config.apiKey}`;
    const response = await fetch(`${this.config.endpoint}/chat/completions`, {
      method: "POST",
      headers,
      body: JSON.stringify(body),
      signal: AbortSignal.timeout(this.config.timeoutMs),
    });
    if (!response.ok) {
      throw new Error(`backend HTTP ${response.status}: ${await response.text()}`);
    }
    const payload = (await response.json()) as {
      choices?: { message?: { content?: string } }[];
    };
    const content = payload.choices?.[0]?.message?.content;
    if (typeof content !== "string") {
      throw new Error("backend response has no message content");
    }
    return content;
  }
}

/** Spawns a user-provided command; request JSON on stdin, completion on stdout. */
export class LocalRuntimeBackend implements Backend {
  constructor(readonly config: BackendConfig) {
    if (!config.command || config.command.length === 0) {
      throw new Error("local-runtime backend needs --command");
    }
  }

  async complete(req: CompletionRequest): Promise<string> {
    const [cmd, ...args] = this.config.command!;
    const child = execFileAsync(cmd!, args, {
      timeout: this.config.timeoutMs,
      maxBuffer: 16 * 1024 * 1024,
    });
    child.child.stdin?.write(
      JSON.stringify({
        system: req.system,
        user: req.user,
        audio_path: req.audioPath,
        model: this.config.model,
        temperature: this.config.temperature,
      }),
    );
    child.child.stdin?.end();
    const { stdout } = await child;
    return stdout.toString().trimEnd();
  }
}

export function makeBackend(config: BackendConfig): Backend {
  if (config.maxRetries < 0) throw new Error("retries must be >= 0");
  switch (config.kind) {
    case "mock":
      return new MockBackend(config);
    case "http-endpoint":
      return new HttpBackend(config);
    case "local-runtime":
      return new LocalRuntimeBackend(config);
  }
}
