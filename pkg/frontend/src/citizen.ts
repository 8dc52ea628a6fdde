/**
 * Citizen view-model: passport application form, document dashboard,
 * visa application form.
 *
 * Dashboard state derives solely from /api/citizen/documents responses;
 * polling uses last-response-wins keyed by a request sequence number so a
 * slow stale poll can never overwrite a newer one.
 */

import { GatewayClient, GatewayError } from './api';
import type { DocumentsResponse, PassportApplicationForm, Receipt, VisaApplicationForm } from './types';
import { FieldErrors, validatePassportForm, validateVisaForm } from './validate';

export interface SubmitResult {
  ok: boolean;
  /** Inline field errors; when non-empty, no network call was made. */
  fieldErrors: FieldErrors;
  receipt?: Receipt;
  error?: { code: string; message: string };
}

export class CitizenView {
  documents: DocumentsResponse | null = null;
  lastError: { code: string; message: string } | null = null;
  private pollSeq = 0;
  private renderedSeq = 0;

  constructor(
    private readonly api: GatewayClient,
    readonly visaTypes: string[] = ['TOURIST', 'BUSINESS', 'STUDENT', 'WORK'],
  ) {}

  async submitPassportApplication(form: PassportApplicationForm): Promise<SubmitResult> {
    const fieldErrors = validatePassportForm(form);
    if (Object.keys(fieldErrors).length > 0) {
      return { ok: false, fieldErrors };
    }
    return this.invoke(() => this.api.applyPassport(form));
  }

  async submitVisaApplication(form: VisaApplicationForm): Promise<SubmitResult> {
    const fieldErrors = validateVisaForm(form, this.visaTypes);
    if (Object.keys(fieldErrors).length > 0) {
      return { ok: false, fieldErrors };
    }
    return this.invoke(() => this.api.applyVisa(form));
  }

  private async invoke(call: () => Promise<Receipt>): Promise<SubmitResult> {
    try {
      const receipt = await call();
      return { ok: receipt.validity === 'VALID', fieldErrors: {}, receipt };
    } catch (e) {
      if (e instanceof GatewayError) {
        this.lastError = { code: e.code, message: e.message };
        return { ok: false, fieldErrors: {}, error: this.lastError };
      }
      throw e;
    }
  }

  /** One dashboard poll; stale responses are dropped. */
  async refreshDocuments(): Promise<void> {
    const seq = ++this.pollSeq;
    const docs = await this.api.citizenDocuments();
    if (seq > this.renderedSeq) {
      this.renderedSeq = seq;
      this.documents = docs;
    }
  }

  /** Whole days until the visa expires (negative when already expired). */
  daysUntilExpiry(visaId: string, today: string): number | null {
    const visa = this.documents?.visas.find((v) => v.visaId === visaId);
    if (!visa) return null;
    const msPerDay = 24 * 3600 * 1000;
    return Math.round((Date.parse(visa.visaExpireDate) - Date.parse(today)) / msPerDay);
  }
}
