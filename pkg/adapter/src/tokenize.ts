import { canonicalize } from "./canonicalize.js";
import { canonicalReactionSmiles, extractTemplate } from "./template.js";

/**
 * Raw route trees mirror the core interchange format, except that
 * reaction nodes carry `metadata.mapped_reaction_smiles` instead of
 * pre-computed tokens.  Tokenization canonicalizes every molecule
 * SMILES, derives `reaction_smiles` (canonical, maps stripped) and
 * `template` at the chosen radius, and passes all other metadata keys
 * through untouched, so re-tokenizing the emitted output is a fixpoint.
 */

type JsonObject = Record<string, unknown>;

const HANDLED_KEYS = new Set([
  "reaction_smiles",
  "template",
  "template_radius",
  "mapped_reaction_smiles",
]);

function isObject(value: unknown): value is JsonObject {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function fail(path: string, message: string): never {
  throw new Error(`${path}: ${message}`);
}

function tokenizeMol(node: unknown, radius: number, path: string): JsonObject {
  if (!isObject(node)) {
    fail(path, "molecule node must be an object");
  }
  if (node.type !== "mol") {
    fail(path, `expected a mol node, got ${JSON.stringify(node.type)}`);
  }
  if (typeof node.smiles !== "string" || node.smiles === "") {
    fail(path, "molecule requires a non-empty 'smiles'");
  }
  const out: JsonObject = {
    type: "mol",
    smiles: canonicalize(node.smiles),
    in_stock: node.in_stock === true,
  };
  const children = node.children ?? [];
  if (!Array.isArray(children)) {
    fail(path, "'children' must be an array");
  }
  if (children.length > 0) {
    out.children = children.map((child, i) =>
      tokenizeReaction(child, radius, `${path}.children[${i}]`),
    );
  }
  return out;
}

function tokenizeReaction(node: unknown, radius: number, path: string): JsonObject {
  if (!isObject(node)) {
    fail(path, "reaction node must be an object");
  }
  if (node.type !== "reaction") {
    fail(path, `expected a reaction node, got ${JSON.stringify(node.type)}`);
  }
  const metadata = node.metadata ?? {};
  if (!isObject(metadata)) {
    fail(path, "'metadata' must be an object");
  }
  const mapped = metadata.mapped_reaction_smiles;
  if (typeof mapped !== "string" || mapped === "") {
    fail(path, "reaction requires 'metadata.mapped_reaction_smiles'");
  }
  const children = node.children;
  if (!Array.isArray(children) || children.length === 0) {
    fail(path, "reaction requires at least one reactant child");
  }

  const outMetadata: JsonObject = {
    reaction_smiles: canonicalReactionSmiles(mapped),
    template: extractTemplate({ mappedRxnSmiles: mapped, radius }),
    template_radius: radius,
  };
  for (const [key, value] of Object.entries(metadata)) {
    if (!HANDLED_KEYS.has(key)) {
      outMetadata[key] = value;
    }
  }
  outMetadata.mapped_reaction_smiles = mapped;

  return {
    type: "reaction",
    metadata: outMetadata,
    children: children.map((child, i) =>
      tokenizeMol(child, radius, `${path}.children[${i}]`),
    ),
  };
}

export interface TokenizeSummary {
  routesRead: number;
  routesWritten: number;
  routesSkipped: number;
  failures: string[];
}

/**
 * Tokenize the routes of one decoded route file (a root object or an
 * array of them).  Failing routes are skipped and reported; the summary
 * and the emitted trees are returned together.
 */
export function tokenizeRouteFile(
  doc: unknown,
  radius: number,
  label: string,
): { routes: JsonObject[]; summary: TokenizeSummary } {
  const raw = Array.isArray(doc) ? doc : [doc];
  const routes: JsonObject[] = [];
  const summary: TokenizeSummary = {
    routesRead: raw.length,
    routesWritten: 0,
    routesSkipped: 0,
    failures: [],
  };
  raw.forEach((entry, index) => {
    const name = Array.isArray(doc) ? `${label}[${index}]` : label;
    try {
      routes.push(tokenizeMol(entry, radius, name));
      summary.routesWritten += 1;
    } catch (error) {
      summary.routesSkipped += 1;
      summary.failures.push(`${name}: ${(error as Error).message}`);
    }
  });
  return { routes, summary };
}

/** Serialize tokenized routes the way the files were shaped on input. */
export function renderRouteFile(routes: JsonObject[], wasArray: boolean): string {
  const payload = wasArray ? routes : routes[0];
  return `${JSON.stringify(payload, null, 2)}\n`;
}
