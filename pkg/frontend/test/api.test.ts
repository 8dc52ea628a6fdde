import { describe, expect, it } from 'vitest';

import { GatewayClient, GatewayError } from '../src/api';
import { MockGateway } from './mock-gateway';

function client(mock = new MockGateway()) {
  return { mock, api: new GatewayClient('http://gw', mock.fetch) };
}

describe('GatewayClient', () => {
  it('login stores the bearer token in memory only', async () => {
    const { api } = client();
    const session = await api.login('pa', 'pw-pa');
    expect(session.role).toBe('PASSPORT_AGENT');
    expect(api.hasSession).toBe(true);
  });

  it('maps error bodies onto GatewayError', async () => {
    const { api } = client();
    const failure = await api.login('pa', 'wrong').catch((e) => e);
    expect(failure).toBeInstanceOf(GatewayError);
    expect(failure.code).toBe('DENIED');
    expect(failure.status).toBe(401);
    expect(failure.retryable).toBe(false);
  });

  it('requests without a session are rejected server-side', async () => {
    const { api } = client();
    const failure = await api.citizenDocuments().catch((e) => e);
    expect(failure.code).toBe('SESSION_EXPIRED');
  });

  it('clearSession drops the token', async () => {
    const { api } = client();
    await api.login('pa', 'pw-pa');
    api.clearSession();
    expect(api.hasSession).toBe(false);
    const failure = await api.passportPending().catch((e) => e);
    expect(failure.code).toBe('SESSION_EXPIRED');
  });

  it('role table is enforced per endpoint', async () => {
    const { api } = client();
    await api.login('va-fr', 'pw-va-fr');
    const failure = await api.passportPending().catch((e) => e);
    expect(failure.code).toBe('FORBIDDEN_FUNCTION');
    expect(failure.status).toBe(403);
  });
});
