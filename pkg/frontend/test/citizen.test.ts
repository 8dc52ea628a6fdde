import { describe, expect, it } from 'vitest';

import { GatewayClient } from '../src/api';
import { CitizenView } from '../src/citizen';
import { MockGateway } from './mock-gateway';

const FORM = {
  userId: 'alice',
  name: 'Alice',
  email: 'alice@example.com',
  phoneNumber: '919876543210',
  address: '42 MG Road',
  aadhaarNumber: '234567890123',
  password: 'hunter2!',
};

function setup() {
  const mock = new MockGateway();
  const api = new GatewayClient('http://gw', mock.fetch);
  return { mock, api, view: new CitizenView(api) };
}

async function approvedPassport(mock: MockGateway, api: GatewayClient, view: CitizenView) {
  await view.submitPassportApplication(FORM);
  const agent = new GatewayClient('http://gw', mock.fetch);
  await agent.login('pa', 'pw-pa');
  await agent.decidePassport('alice', 'APPROVE');
  await api.login('alice', 'hunter2!');
  await view.refreshDocuments();
  return view.documents!.passport!;
}

describe('passport application form', () => {
  it('invalid aadhaar yields an inline error and no network call', async () => {
    const { mock, view } = setup();
    const result = await view.submitPassportApplication({ ...FORM, aadhaarNumber: '23456789012' });
    expect(result.ok).toBe(false);
    expect(result.fieldErrors.aadhaarNumber).toMatch(/12 digits/);
    expect(mock.requestCount).toBe(0);
  });

  it('valid submission shows a PENDING chip after the next poll', async () => {
    const { api, view } = setup();
    const result = await view.submitPassportApplication(FORM);
    expect(result.ok).toBe(true);
    expect(result.receipt?.validity).toBe('VALID');

    await api.login('alice', 'hunter2!');
    await view.refreshDocuments();
    expect(view.documents?.pending).toEqual([{ kind: 'PASSPORT', id: 'alice', status: 'PENDING' }]);
  });

  it('gateway rejections surface with their error code', async () => {
    const { view } = setup();
    await view.submitPassportApplication(FORM);
    const again = await view.submitPassportApplication(FORM);
    expect(again.ok).toBe(false);
    expect(again.error?.code).toBe('DUPLICATE_APPLICATION');
  });
});

describe('document dashboard', () => {
  it('renders the exact passport field set after approval', async () => {
    const { mock, api, view } = setup();
    const passport = await approvedPassport(mock, api, view);
    expect(Object.keys(passport).sort()).toEqual([
      'aadhaarNumber',
      'address',
      'email',
      'issueDate',
      'name',
      'passportId',
      'phoneNumber',
    ]);
  });

  it('a stale poll response never overwrites a newer one', async () => {
    const { mock, api, view } = setup();
    await approvedPassport(mock, api, view);

    // hold the first poll's (stale) response until after a newer poll lands
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const realFetch = mock.fetch;
    let gated = true;
    const slowApi = new GatewayClient('http://gw', async (url, init) => {
      const response = await realFetch(url, init);
      if (url.includes('/documents') && gated) {
        gated = false;
        await gate;
      }
      return response;
    });
    const slowView = new CitizenView(slowApi);
    await slowApi.login('alice', 'hunter2!');

    const stale = slowView.refreshDocuments();
    await slowView.submitVisaApplication({
      passportId: view.documents!.passport!.passportId,
      country: 'France',
      visaType: 'TOURIST',
      durationDays: 90,
    });
    await slowView.refreshDocuments(); // newer poll, not gated
    release();
    await stale;
    // the newer response (with the visa application pending) must win
    expect(slowView.documents?.pending.some((p) => p.kind === 'VISA')).toBe(true);
  });

  it('computes the expiry countdown from the visa card', async () => {
    const { mock, api, view } = setup();
    const passport = await approvedPassport(mock, api, view);
    await view.submitVisaApplication({
      passportId: passport.passportId,
      country: 'France',
      visaType: 'TOURIST',
      durationDays: 90,
    });
    const agent = new GatewayClient('http://gw', mock.fetch);
    await agent.login('va-fr', 'pw-va-fr');
    const [row] = (await agent.visaPending()).applications;
    await agent.verifyVisa(row.applicationId);
    await agent.decideVisa(row.applicationId, 'APPROVE');

    await view.refreshDocuments();
    const [visa] = view.documents!.visas;
    expect(view.daysUntilExpiry(visa.visaId, visa.visaIssueDate)).toBe(90);
  });

  it('visa form rejects an unknown visa type before any network call', async () => {
    const { mock, view } = setup();
    const before = mock.requestCount;
    const result = await view.submitVisaApplication({
      passportId: 'P0001',
      country: 'France',
      visaType: 'PILGRIM',
      durationDays: 10,
    });
    expect(result.ok).toBe(false);
    expect(result.fieldErrors.visaType).toBeTruthy();
    expect(mock.requestCount).toBe(before);
  });
});
