/**
 * Typed client for the gateway HTTP API.
 *
 * The bearer token lives only in this object (memory) — passwords exist
 * solely in the in-flight login/apply request bodies and are never stored.
 */

import type {
  BlocksResponse,
  DocumentsResponse,
  ErrorBody,
  LoginResponse,
  PassportApplication,
  PassportApplicationForm,
  Receipt,
  VisaApplication,
  VisaApplicationForm,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly retryable: boolean,
    public readonly status: number,
  ) {
    super(message);
    this.name = 'GatewayError';
  }
}

export class GatewayClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  get hasSession(): boolean {
    return this.token !== null;
  }

  clearSession(): void {
    this.token = null;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (this.token) headers['authorization'] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const err = payload as ErrorBody;
      throw new GatewayError(
        err.code ?? 'UNKNOWN',
        err.message ?? response.statusText,
        err.retryable ?? false,
        response.status,
      );
    }
    return payload as T;
  }

  async login(subjectId: string, password: string): Promise<LoginResponse> {
    const session = await this.request<LoginResponse>('POST', '/api/login', {
      subjectId,
      password,
    });
    this.token = session.token;
    return session;
  }

  applyPassport(form: PassportApplicationForm): Promise<Receipt> {
    return this.request('POST', '/api/citizen/passport-applications', form);
  }

  citizenDocuments(): Promise<DocumentsResponse> {
    return this.request('GET', '/api/citizen/documents');
  }

  applyVisa(form: VisaApplicationForm): Promise<Receipt> {
    return this.request('POST', '/api/citizen/visa-applications', form);
  }

  passportPending(): Promise<{ applications: PassportApplication[] }> {
    return this.request('GET', '/api/agent/passport/pending');
  }

  decidePassport(applicationId: string, decision: 'APPROVE' | 'REJECT'): Promise<Receipt> {
    return this.request('POST', `/api/agent/passport/${applicationId}/decision`, { decision });
  }

  visaPending(): Promise<{ applications: VisaApplication[] }> {
    return this.request('GET', '/api/agent/visa/pending');
  }

  verifyVisa(applicationId: string): Promise<Receipt> {
    return this.request('POST', `/api/agent/visa/${applicationId}/verify`, {});
  }

  decideVisa(applicationId: string, decision: 'APPROVE' | 'REJECT'): Promise<Receipt> {
    return this.request('POST', `/api/agent/visa/${applicationId}/decision`, { decision });
  }

  registerAgent(subjectId: string, role: string, country: string, password: string): Promise<Receipt> {
    return this.request('POST', '/api/admin/agents', { subjectId, role, country, password });
  }

  blocks(from?: number, to?: number): Promise<BlocksResponse> {
    const params = new URLSearchParams();
    if (from !== undefined) params.set('from', String(from));
    if (to !== undefined) params.set('to', String(to));
    const query = params.toString();
    return this.request('GET', '/api/admin/blocks' + (query ? `?${query}` : ''));
  }
}
