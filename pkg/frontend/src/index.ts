export { GatewayClient, GatewayError } from './api';
export type { FetchLike } from './api';
export { CitizenView } from './citizen';
export type { SubmitResult } from './citizen';
export { PassportQueueView, VisaQueueView, startPolling } from './agent';
export type { DecisionOutcome, Notice } from './agent';
export { AdminView } from './admin';
export { allowedRoutes, canVisit, homeRoute } from './routes';
export type { Route } from './routes';
export * from './types';
export { isValidAadhaar, isValidEmail, validatePassportForm, validateVisaForm } from './validate';
export type { FieldErrors } from './validate';
