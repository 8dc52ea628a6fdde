/**
 * Admin view-models: agent registration and the block explorer table.
 */

import { GatewayClient, GatewayError } from './api';
import type { BlockSummary, Receipt } from './types';

const AGENT_ROLES = ['PASSPORT_AGENT', 'VISA_AGENT', 'ADMIN'] as const;
export type AgentRole = (typeof AGENT_ROLES)[number];

export class AdminView {
  blocks: BlockSummary[] = [];
  height = 0;
  lastError: { code: string; message: string } | null = null;

  constructor(private readonly api: GatewayClient) {}

  async registerAgent(
    subjectId: string,
    role: AgentRole,
    country: string,
    password: string,
  ): Promise<Receipt | null> {
    if (!AGENT_ROLES.includes(role)) {
      this.lastError = { code: 'VALIDATION', message: `unknown role ${role}` };
      return null;
    }
    if (role === 'VISA_AGENT' && !country.trim()) {
      this.lastError = { code: 'VALIDATION', message: 'visa agents need a country' };
      return null;
    }
    try {
      return await this.api.registerAgent(subjectId, role, country, password);
    } catch (e) {
      if (e instanceof GatewayError) {
        this.lastError = { code: e.code, message: e.message };
        return null;
      }
      throw e;
    }
  }

  /** Load a page of blocks, newest last. */
  async loadBlocks(from?: number, to?: number): Promise<void> {
    const response = await this.api.blocks(from, to);
    this.blocks = response.blocks;
    this.height = response.height;
  }

  /** True when every adjacent pair in the loaded page is hash-linked. */
  pageIsLinked(): boolean {
    for (let i = 1; i < this.blocks.length; i++) {
      if (this.blocks[i].prevHash !== this.blocks[i - 1].headerHash) return false;
    }
    return true;
  }
}
