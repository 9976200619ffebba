import type { Atom, Bond, Molecule } from "openchem";

import { parseOrThrow } from "./canonicalize.js";
import { ExtractionFailureError, UnmappedReactionError } from "./errors.js";

/** Atom address within one side of a reaction: component index + atom id. */
export interface AtomRef {
  mol: number;
  id: number;
}

export function refKey(ref: AtomRef): string {
  return `${ref.mol}:${ref.id}`;
}

export interface ReactionSide {
  molecules: Molecule[];
  /** map number -> atom address (map numbers are unique per side) */
  byMap: Map<number, AtomRef>;
}

export interface ParsedReaction {
  reactants: ReactionSide;
  products: ReactionSide;
}

export function atomAt(side: ReactionSide, ref: AtomRef): Atom {
  return side.molecules[ref.mol]!.atoms[ref.id]!;
}

export function neighborsOf(
  side: ReactionSide,
  ref: AtomRef,
): { ref: AtomRef; bond: Bond }[] {
  const mol = side.molecules[ref.mol]!;
  const out: { ref: AtomRef; bond: Bond }[] = [];
  for (const bond of mol.bonds) {
    if (bond.atom1 === ref.id) {
      out.push({ ref: { mol: ref.mol, id: bond.atom2 }, bond });
    } else if (bond.atom2 === ref.id) {
      out.push({ ref: { mol: ref.mol, id: bond.atom1 }, bond });
    }
  }
  return out;
}

function buildSide(smiles: string, label: string): ReactionSide {
  const molecules = parseOrThrow(smiles);
  const byMap = new Map<number, AtomRef>();
  molecules.forEach((mol, molIdx) => {
    mol.atoms.forEach((atom: Atom) => {
      if (atom.atomClass > 0) {
        if (byMap.has(atom.atomClass)) {
          throw new UnmappedReactionError(
            `${label} side uses atom map ${atom.atomClass} twice`,
          );
        }
        byMap.set(atom.atomClass, { mol: molIdx, id: atom.id });
      }
    });
  });
  return { molecules, byMap };
}

/** Split and parse an atom-mapped reaction SMILES (reactants>agents>products). */
export function parseMappedReaction(rxnSmiles: string): ParsedReaction {
  const parts = rxnSmiles.split(">");
  if (parts.length !== 3) {
    throw new ExtractionFailureError(
      `not a reaction SMILES (expected reactants>agents>products): ${rxnSmiles}`,
    );
  }
  const [reactantStr, , productStr] = parts;
  if (!reactantStr || !productStr) {
    throw new ExtractionFailureError("reaction needs both reactants and products");
  }
  const reactants = buildSide(reactantStr, "reactant");
  const products = buildSide(productStr, "product");
  if (reactants.byMap.size === 0 && products.byMap.size === 0) {
    throw new UnmappedReactionError("reaction carries no atom maps");
  }
  for (const mapNum of products.byMap.keys()) {
    if (!reactants.byMap.has(mapNum)) {
      throw new UnmappedReactionError(
        `product atom map ${mapNum} has no counterpart in the reactants`,
      );
    }
  }
  return { reactants, products };
}

function bondOrder(bond: Bond): string {
  return bond.type as string;
}

/** Environment fingerprint of one mapped atom on one side. */
function signature(side: ReactionSide, ref: AtomRef): string {
  const atom = atomAt(side, ref);
  const neighbors = neighborsOf(side, ref)
    .map(({ ref: other, bond }) => {
      const neighbor = atomAt(side, other);
      const map = neighbor.atomClass > 0 ? neighbor.atomClass : 0;
      const element = map === 0 ? neighbor.symbol : "";
      return `${map}/${element}/${bondOrder(bond)}`;
    })
    .sort();
  return [
    atom.symbol,
    atom.charge,
    atom.hydrogens,
    atom.aromatic,
    neighbors.join(","),
  ].join("|");
}

/**
 * Map numbers at the reaction center: mapped atoms whose bonding
 * environment, hydrogen count or charge differs between the two sides,
 * plus reactant-only maps (leaving groups).
 */
export function reactionCenterMaps(rxn: ParsedReaction): Set<number> {
  const center = new Set<number>();
  for (const [mapNum, productRef] of rxn.products.byMap) {
    const reactantRef = rxn.reactants.byMap.get(mapNum)!;
    if (signature(rxn.products, productRef) !== signature(rxn.reactants, reactantRef)) {
      center.add(mapNum);
    }
  }
  for (const mapNum of rxn.reactants.byMap.keys()) {
    if (!rxn.products.byMap.has(mapNum)) {
      center.add(mapNum);
    }
  }
  return center;
}

/**
 * Select the atoms of one side that belong to the template: the center
 * atoms, on the reactant side any unmapped atoms directly bonded to them,
 * and everything within `radius` bonds of those seeds.
 */
export function selectTemplateAtoms(
  side: ReactionSide,
  centerMaps: Set<number>,
  radius: number,
  includeUnmappedNeighbors: boolean,
): Set<string> {
  const seeds: AtomRef[] = [];
  for (const mapNum of centerMaps) {
    const ref = side.byMap.get(mapNum);
    if (ref) {
      seeds.push(ref);
    }
  }
  if (includeUnmappedNeighbors) {
    const extra: AtomRef[] = [];
    for (const seed of seeds) {
      for (const { ref } of neighborsOf(side, seed)) {
        if (atomAt(side, ref).atomClass === 0) {
          extra.push(ref);
        }
      }
    }
    seeds.push(...extra);
  }

  const selected = new Set<string>(seeds.map(refKey));
  let frontier = seeds;
  for (let depth = 0; depth < radius; depth += 1) {
    const next: AtomRef[] = [];
    for (const ref of frontier) {
      for (const { ref: neighbor } of neighborsOf(side, ref)) {
        const key = refKey(neighbor);
        if (!selected.has(key)) {
          selected.add(key);
          next.push(neighbor);
        }
      }
    }
    frontier = next;
  }
  return selected;
}
