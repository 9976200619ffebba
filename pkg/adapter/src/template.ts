import { canonicalize } from "./canonicalize.js";
import { ExtractionFailureError } from "./errors.js";
import {
  parseMappedReaction,
  reactionCenterMaps,
  selectTemplateAtoms,
} from "./reaction.js";
import { subgraphSmarts } from "./smarts.js";

export interface MappedReaction {
  mappedRxnSmiles: string;
  /** bonds of context around the reaction center, 0 to 2 */
  radius: number;
}

/**
 * Extract a retro-template from an atom-mapped reaction SMILES.
 *
 * The template is written in retrosynthesis direction, product pattern
 * first: `product>>reactants`.  The reaction center is the set of mapped
 * atoms whose bonds, hydrogens or charge change, plus reactant-only
 * mapped atoms (leaving groups); unmapped reactant atoms bonded directly
 * to the center are kept, and the pattern then grows `radius` bonds
 * outward on each side.  Output is deterministic for identical input.
 */
export function extractTemplate(rxn: MappedReaction): string {
  if (!Number.isInteger(rxn.radius) || rxn.radius < 0 || rxn.radius > 2) {
    throw new ExtractionFailureError(
      `template radius must be 0, 1 or 2, got ${rxn.radius}`,
    );
  }
  const parsed = parseMappedReaction(rxn.mappedRxnSmiles);
  const center = reactionCenterMaps(parsed);
  if (center.size === 0) {
    throw new ExtractionFailureError(
      "no reaction center: both sides have identical mapped environments",
    );
  }
  const productAtoms = selectTemplateAtoms(parsed.products, center, rxn.radius, false);
  const reactantAtoms = selectTemplateAtoms(parsed.reactants, center, rxn.radius, true);
  if (productAtoms.size === 0 || reactantAtoms.size === 0) {
    throw new ExtractionFailureError("reaction center missing on one side");
  }
  const productPattern = subgraphSmarts(parsed.products.molecules, productAtoms);
  const reactantPattern = subgraphSmarts(parsed.reactants.molecules, reactantAtoms);
  const template = `${productPattern}>>${reactantPattern}`;
  if (/[\t\n\r]/.test(template)) {
    throw new ExtractionFailureError("template contains TAB or newline");
  }
  return template;
}

/** Strip atom maps and canonicalize a reaction SMILES as reactants>>product. */
export function canonicalReactionSmiles(mappedRxnSmiles: string): string {
  const parts = mappedRxnSmiles.split(">");
  if (parts.length !== 3) {
    throw new ExtractionFailureError(
      `not a reaction SMILES (expected reactants>agents>products): ${mappedRxnSmiles}`,
    );
  }
  const strip = (s: string): string => s.replace(/:\d+(?=\])/g, "");
  return `${canonicalize(strip(parts[0]!))}>>${canonicalize(strip(parts[2]!))}`;
}
