/**
 * Gateway API data shapes.
 *
 * Everything the portal renders derives from these responses; no business
 * rule is evaluated client-side beyond form pre-validation.
 */

export type Role = 'CITIZEN' | 'PASSPORT_AGENT' | 'VISA_AGENT' | 'ADMIN';

export interface LoginResponse {
  token: string;
  role: Role;
  country: string | null;
  expiresAt: number;
}

/** Commit receipt for an invoke; MVCC_CONFLICT means "decided elsewhere". */
export interface Receipt {
  txId: string;
  blockNumber: number | null;
  validity: 'VALID' | 'MVCC_CONFLICT' | 'DUPLICATE_TXID' | string;
}

export interface ErrorBody {
  code: string;
  message: string;
  retryable: boolean;
}

export interface PassportApplicationForm {
  userId: string;
  name: string;
  email: string;
  phoneNumber: string;
  address: string;
  aadhaarNumber: string;
  password: string;
}

export interface PassportApplication {
  userId: string;
  name: string;
  email: string;
  phoneNumber: number;
  address: string;
  aadhaarNumber: number;
  status: 'PENDING';
  submittedAt: number;
}

export interface Passport {
  passportId: string;
  name: string;
  email: string;
  phoneNumber: number;
  address: string;
  aadhaarNumber: number;
  issueDate: string;
}

export interface VisaApplicationForm {
  passportId: string;
  country: string;
  visaType: string;
  durationDays: number;
}

export interface VisaApplication {
  applicationId: string;
  passportId: string;
  country: string;
  visaType: string;
  durationDays: number;
  status: 'PENDING' | 'VERIFIED';
  submittedAt: number;
}

export interface Visa {
  visaId: string;
  country: string;
  visaType: string;
  passportId: string;
  name: string;
  email: string;
  address: string;
  aadhaarNumber: number;
  visaIssueDate: string;
  visaExpireDate: string;
}

export interface PendingStatus {
  kind: 'PASSPORT' | 'VISA';
  id: string;
  status: string;
}

export interface DocumentsResponse {
  passport?: Passport;
  visas: Visa[];
  pending: PendingStatus[];
}

export interface BlockSummary {
  number: number;
  prevHash: string;
  dataHash: string;
  headerHash: string;
  txCount: number;
  txIds: string[];
  validationFlags: string[];
}

export interface BlocksResponse {
  blocks: BlockSummary[];
  height: number;
}
