/**
 * Route guard: which views each session role may reach.
 *
 * Mirrors the gateway's role table so no agent/admin control is even
 * rendered under a citizen session.
 */

import type { Role } from './types';

export type Route =
  | 'login'
  | 'apply-passport'
  | 'citizen-dashboard'
  | 'passport-queue'
  | 'visa-queue'
  | 'admin-agents'
  | 'block-explorer';

const ROUTES_BY_ROLE: Record<Role, Route[]> = {
  CITIZEN: ['citizen-dashboard'],
  PASSPORT_AGENT: ['passport-queue'],
  VISA_AGENT: ['visa-queue'],
  ADMIN: ['admin-agents', 'block-explorer'],
};

/** Routes reachable without a session. */
const PUBLIC_ROUTES: Route[] = ['login', 'apply-passport'];

export function allowedRoutes(role: Role | null): Route[] {
  if (role === null) return [...PUBLIC_ROUTES];
  return [...PUBLIC_ROUTES, ...ROUTES_BY_ROLE[role]];
}

export function canVisit(role: Role | null, route: Route): boolean {
  return allowedRoutes(role).includes(route);
}

/** The landing route after a successful login. */
export function homeRoute(role: Role): Route {
  return ROUTES_BY_ROLE[role][0];
}
