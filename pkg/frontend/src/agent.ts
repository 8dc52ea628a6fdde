/**
 * Agent queue view-models for passport and visa review.
 *
 * The visa queue enforces the verify-before-approve ordering in the UI:
 * the APPROVE control stays disabled until the row's status is VERIFIED.
 * An MVCC_CONFLICT commit receipt renders as "decided elsewhere —
 * refreshed" and triggers a queue refresh; FORBIDDEN logs the agent out.
 */

import { GatewayClient, GatewayError } from './api';
import type { PassportApplication, Receipt, VisaApplication } from './types';

export interface Notice {
  kind: 'receipt' | 'conflict' | 'error';
  text: string;
}

export interface DecisionOutcome {
  status: 'committed' | 'conflict' | 'disabled' | 'error';
  receipt?: Receipt;
}

abstract class QueueView<Row extends { status?: string }> {
  rows: Row[] = [];
  notices: Notice[] = [];
  loggedOut = false;

  constructor(protected readonly api: GatewayClient) {}

  protected abstract fetchRows(): Promise<Row[]>;
  protected abstract rowId(row: Row): string;

  async refresh(): Promise<void> {
    try {
      this.rows = await this.fetchRows();
    } catch (e) {
      this.handleError(e);
    }
  }

  findRow(id: string): Row | undefined {
    return this.rows.find((r) => this.rowId(r) === id);
  }

  protected async applyDecision(id: string, call: () => Promise<Receipt>): Promise<DecisionOutcome> {
    try {
      const receipt = await call();
      if (receipt.validity === 'MVCC_CONFLICT') {
        this.notices.push({ kind: 'conflict', text: 'decided elsewhere — refreshed' });
        await this.refresh();
        return { status: 'conflict', receipt };
      }
      this.notices.push({
        kind: 'receipt',
        text: `committed in block ${receipt.blockNumber} (${receipt.txId.slice(0, 12)}…)`,
      });
      this.rows = this.rows.filter((r) => this.rowId(r) !== id);
      return { status: 'committed', receipt };
    } catch (e) {
      this.handleError(e);
      return { status: 'error' };
    }
  }

  protected handleError(e: unknown): void {
    if (e instanceof GatewayError) {
      if (e.code === 'FORBIDDEN' || e.code === 'FORBIDDEN_FUNCTION' || e.code === 'SESSION_EXPIRED') {
        this.loggedOut = true;
        this.api.clearSession();
      }
      this.notices.push({ kind: 'error', text: `${e.code}: ${e.message}` });
      return;
    }
    throw e;
  }
}

export class PassportQueueView extends QueueView<PassportApplication> {
  protected fetchRows(): Promise<PassportApplication[]> {
    return this.api.passportPending().then((r) => r.applications);
  }

  protected rowId(row: PassportApplication): string {
    return row.userId;
  }

  canApprove(_id: string): boolean {
    return true; // passport reviews have no verification precondition
  }

  decide(id: string, decision: 'APPROVE' | 'REJECT'): Promise<DecisionOutcome> {
    return this.applyDecision(id, () => this.api.decidePassport(id, decision));
  }
}

export class VisaQueueView extends QueueView<VisaApplication> {
  protected fetchRows(): Promise<VisaApplication[]> {
    return this.api.visaPending().then((r) => r.applications);
  }

  protected rowId(row: VisaApplication): string {
    return row.applicationId;
  }

  /** APPROVE is available only once the row has been verified. */
  canApprove(id: string): boolean {
    return this.findRow(id)?.status === 'VERIFIED';
  }

  async verify(id: string): Promise<DecisionOutcome> {
    try {
      const receipt = await this.api.verifyVisa(id);
      const row = this.findRow(id);
      if (receipt.validity === 'VALID' && row) row.status = 'VERIFIED';
      return { status: receipt.validity === 'VALID' ? 'committed' : 'conflict', receipt };
    } catch (e) {
      this.handleError(e);
      return { status: 'error' };
    }
  }

  decide(id: string, decision: 'APPROVE' | 'REJECT'): Promise<DecisionOutcome> {
    if (decision === 'APPROVE' && !this.canApprove(id)) {
      // the control is disabled in the DOM; this guard makes the rule
      // hold even for programmatic calls
      return Promise.resolve({ status: 'disabled' });
    }
    return this.applyDecision(id, () => this.api.decideVisa(id, decision));
  }
}

/** Poll driver: refresh a queue every `intervalMs` until stopped. */
export function startPolling(view: { refresh(): Promise<void> }, intervalMs = 3000): () => void {
  const timer = setInterval(() => void view.refresh(), intervalMs);
  return () => clearInterval(timer);
}
