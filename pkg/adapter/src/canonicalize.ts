import { generateSMILES, parseSMILES, type Molecule } from "openchem";

import { UnparseableSmilesError } from "./errors.js";

/** Parse a (possibly multi-component) SMILES string or throw. */
export function parseOrThrow(smiles: string): Molecule[] {
  const result = parseSMILES(smiles);
  if (result.errors.length > 0) {
    const first = result.errors[0]!;
    throw new UnparseableSmilesError(
      smiles,
      `${first.message} at position ${first.position}`,
    );
  }
  if (result.molecules.length === 0) {
    throw new UnparseableSmilesError(smiles, "no molecules parsed");
  }
  return result.molecules;
}

/**
 * Canonicalize a molecule SMILES string.
 *
 * Multi-component inputs are canonicalized per component and re-joined in
 * sorted order, so the result is independent of component order and the
 * whole operation is idempotent.
 */
export function canonicalize(smiles: string): string {
  const molecules = parseOrThrow(smiles);
  const parts = molecules.map((mol) => generateSMILES(mol));
  parts.sort();
  return parts.join(".");
}
