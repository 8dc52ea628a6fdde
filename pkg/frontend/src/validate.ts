/**
 * Form pre-validation mirroring the contract's field rules.
 *
 * These checks only decide whether a request is worth sending; the ledger
 * re-validates everything server-side.
 */

import type { PassportApplicationForm, VisaApplicationForm } from './types';

export type FieldErrors = Record<string, string>;

/** Exactly one '@' with non-empty local and domain parts. */
export function isValidEmail(email: string): boolean {
  const parts = email.split('@');
  return parts.length === 2 && parts[0].length > 0 && parts[1].length > 0;
}

/** Aadhaar numbers are exactly 12 digits and do not start with 0. */
export function isValidAadhaar(aadhaar: string): boolean {
  return /^[1-9][0-9]{11}$/.test(aadhaar);
}

export function validatePassportForm(form: PassportApplicationForm): FieldErrors {
  const errors: FieldErrors = {};
  if (!form.userId.trim()) errors.userId = 'userId must be non-empty';
  if (!form.name.trim()) errors.name = 'name must be non-empty';
  if (!form.address.trim()) errors.address = 'address must be non-empty';
  if (!isValidEmail(form.email)) errors.email = "email must contain exactly one '@'";
  if (!/^[0-9]+$/.test(form.phoneNumber)) errors.phoneNumber = 'phone number must be numeric';
  if (!isValidAadhaar(form.aadhaarNumber)) errors.aadhaarNumber = 'aadhaar must have exactly 12 digits';
  if (!form.password) errors.password = 'password must be non-empty';
  return errors;
}

export function validateVisaForm(form: VisaApplicationForm, visaTypes: string[]): FieldErrors {
  const errors: FieldErrors = {};
  if (!form.passportId.trim()) errors.passportId = 'passportId must be non-empty';
  if (!form.country.trim()) errors.country = 'country must be non-empty';
  if (!visaTypes.includes(form.visaType)) {
    errors.visaType = `visaType must be one of ${visaTypes.join(', ')}`;
  }
  if (!Number.isInteger(form.durationDays) || form.durationDays < 1) {
    errors.durationDays = 'durationDays must be >= 1';
  }
  return errors;
}
