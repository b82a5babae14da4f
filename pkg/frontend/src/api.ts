/**
 * Typed client for the statboard HTTP API. Every request goes through
 * fetch; the UI performs no statistical computation of its own.
 */

export type QuestionKind = "likert5" | "choice" | "numeric" | "free_text";

export interface Question {
  id: string;
  prompt: string;
  kind: QuestionKind;
  options: string[] | null;
  required: boolean;
}

export interface Questionnaire {
  id: string;
  title: string;
  version: number;
  min_level_to_view_report: number;
  questions: Question[];
}

export interface AuthResult {
  session: string;
  level: number;
  questionnaire_id: string;
  single_use: boolean;
}

export interface Violation {
  question_id: string;
  code: string;
  message: string;
}

export interface ReportBlock {
  kind: string;
  title: string;
  params: Record<string, unknown>;
  min_level: number;
  status: "ok" | "empty" | "error";
  result: Record<string, any> | null;
  charts: Record<string, string>;
  detail: string | null;
}

export interface Report {
  spec_id: string;
  source: Record<string, string>;
  data_version: number;
  generated_at: string;
  blocks: ReportBlock[];
}

/** Non-2xx response; carries status and the parsed body. */
export class ApiError extends Error {
  status: number;
  body: any;

  constructor(status: number, body: any) {
    super(`HTTP ${status}: ${body?.error ?? "request failed"}`);
    this.status = status;
    this.body = body;
  }

  get violations(): Violation[] {
    return (this.body?.violations ?? []) as Violation[];
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  private authHeaders(session: string): Record<string, string> {
    return { Authorization: `Bearer ${session}` };
  }

  auth(token: string): Promise<AuthResult> {
    return this.request<AuthResult>("/api/auth", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ token }),
    });
  }

  getQuestionnaire(id: string, session: string): Promise<Questionnaire> {
    return this.request<Questionnaire>(`/api/questionnaires/${id}`, {
      headers: this.authHeaders(session),
    });
  }

  submitResponse(
    id: string,
    session: string,
    answers: Record<string, unknown>,
    contact?: string,
  ): Promise<{ version: number }> {
    return this.request<{ version: number }>(`/api/questionnaires/${id}/responses`, {
      method: "POST",
      headers: { "Content-Type": "application/json", ...this.authHeaders(session) },
      body: JSON.stringify(contact ? { answers, contact } : { answers }),
    });
  }

  getReport(id: string, session: string): Promise<Report> {
    return this.request<Report>(`/api/questionnaires/${id}/report`, {
      headers: this.authHeaders(session),
    });
  }
}
