/** Typed client for the appvault HTTP API. The explorer consumes these
 * endpoints and nothing else; every value it renders comes from one of the
 * response bodies below. */

export interface NodeRef {
  id: string;
  kind: string;
}

export interface EdgeRef {
  rel: string;
  src: string;
  src_kind: string;
  dst: string;
  dst_kind: string;
  prob?: number;
}

export interface Subgraph {
  nodes: NodeRef[];
  edges: EdgeRef[];
}

export interface Health {
  status: string;
  theta: number;
  tau_m: number;
  blocking: boolean;
  enabled_kinds: string[];
  stoplist: string[];
  corpus_digest: string;
  record_count: number;
  built_at: string;
}

export interface PiggybackFact {
  package_name: string;
  version_code: number;
  original: string;
  variant: string;
  cert_original: string;
  cert_variant: string;
  code_sim?: number;
}

export interface ChainLink {
  sha256: string;
  version_code: number;
  is_malware: boolean;
}

export interface UpdateAttackFact {
  package_name: string;
  fingerprint?: string;
  chain: ChainLink[];
  first_malicious_version: number;
}

export interface MarketReplicationFact {
  market: string;
  app_count: number;
  replicated_count: number;
  replication_ratio: number;
  shared: Record<string, number>;
}

export interface SignatureCluster {
  representative: {
    app: string;
    method_id: string;
    cx: number;
    cy: number;
    cz: number;
    weight: number;
  };
  support_in_family: number;
  support_in_benign: number;
  members: [string, string][];
}

export interface FamilySignature {
  family: string;
  clusters: SignatureCluster[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async get<T>(path: string, params?: Record<string, string | number>): Promise<T> {
    let url = this.baseUrl + path;
    if (params && Object.keys(params).length > 0) {
      const search = new URLSearchParams();
      for (const [key, value] of Object.entries(params)) {
        search.set(key, String(value));
      }
      url += "?" + search.toString();
    }
    const response = await fetch(url);
    if (!response.ok) {
      throw new ApiError(response.status, `${path}: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  health(): Promise<Health> {
    return this.get<Health>("/health");
  }

  queryApps(filter: string, kind = "APP", limit?: number): Promise<string[]> {
    const params: Record<string, string | number> = { filter, kind };
    if (limit !== undefined) {
      params.limit = limit;
    }
    return this.get<string[]>("/apps", params);
  }

  neighbors(id: string, kind = "APP", depth = 1): Promise<Subgraph> {
    return this.get<Subgraph>("/graph/neighbors", { id, kind, depth });
  }

  piggybacked(): Promise<PiggybackFact[]> {
    return this.get<PiggybackFact[]>("/facts/piggybacked");
  }

  updateAttacks(): Promise<UpdateAttackFact[]> {
    return this.get<UpdateAttackFact[]>("/facts/update-attacks");
  }

  markets(): Promise<MarketReplicationFact[]> {
    return this.get<MarketReplicationFact[]>("/facts/markets");
  }

  signatures(family: string): Promise<FamilySignature> {
    return this.get<FamilySignature>(`/facts/families/${encodeURIComponent(family)}/signatures`);
  }
}
