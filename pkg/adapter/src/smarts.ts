import { BondType, type Atom, type Bond, type Molecule } from "openchem";

/** Elements that may legally be written lowercase (aromatic) in SMARTS. */
const AROMATIC_ELEMENTS = new Set(["B", "C", "N", "O", "P", "S", "Se", "As"]);

const BOND_SYMBOL: Record<string, string> = {
  [BondType.SINGLE]: "-",
  [BondType.DOUBLE]: "=",
  [BondType.TRIPLE]: "#",
  [BondType.QUADRUPLE]: "$",
  [BondType.AROMATIC]: ":",
};

function atomToken(atom: Atom): string {
  let symbol = atom.symbol;
  if (atom.aromatic && AROMATIC_ELEMENTS.has(symbol)) {
    symbol = symbol.toLowerCase();
  }
  let token = symbol + `H${atom.hydrogens}`;
  if (atom.charge > 0) {
    token += atom.charge === 1 ? "+" : `+${atom.charge}`;
  } else if (atom.charge < 0) {
    token += atom.charge === -1 ? "-" : `-${Math.abs(atom.charge)}`;
  }
  if (atom.atomClass > 0) {
    token += `:${atom.atomClass}`;
  }
  return `[${token}]`;
}

function closureToken(digit: number): string {
  return digit < 10 ? String(digit) : `%${digit}`;
}

interface SubgraphComponent {
  /** smallest atom map in the component, Infinity when unmapped */
  minMap: number;
  smarts: string;
}

/**
 * Write one connected component of the selected subgraph as SMARTS.
 *
 * Traversal is a deterministic DFS: the root is the selected atom with
 * the smallest (map number, id), and neighbors are visited in the same
 * order, so identical input always yields identical output.
 */
function writeComponent(
  mol: Molecule,
  component: number[],
): SubgraphComponent {
  const inComponent = new Set(component);
  const neighbors = new Map<number, { id: number; bond: Bond }[]>();
  for (const id of component) {
    neighbors.set(id, []);
  }
  for (const bond of mol.bonds) {
    if (inComponent.has(bond.atom1) && inComponent.has(bond.atom2)) {
      neighbors.get(bond.atom1)!.push({ id: bond.atom2, bond });
      neighbors.get(bond.atom2)!.push({ id: bond.atom1, bond });
    }
  }
  const sortKey = (id: number): [number, number] => {
    const atom = mol.atoms[id]!;
    return [atom.atomClass > 0 ? atom.atomClass : Number.POSITIVE_INFINITY, id];
  };
  const byKey = (a: number, b: number): number => {
    const [ma, ia] = sortKey(a);
    const [mb, ib] = sortKey(b);
    return ma - mb || ia - ib;
  };
  for (const list of neighbors.values()) {
    list.sort((x, y) => byKey(x.id, y.id));
  }
  const root = [...component].sort(byKey)[0]!;

  // pass 1: classify edges into tree and ring-closure edges
  const visited = new Set<number>();
  const closures = new Map<string, number>();
  const closuresByAtom = new Map<number, { digit: number; bond: Bond }[]>();
  let nextDigit = 1;
  const edgeKey = (a: number, b: number): string =>
    a < b ? `${a}-${b}` : `${b}-${a}`;

  const classify = (id: number, parent: number): void => {
    visited.add(id);
    for (const { id: next, bond } of neighbors.get(id)!) {
      if (next === parent) {
        continue;
      }
      if (!visited.has(next)) {
        classify(next, id);
      } else if (!closures.has(edgeKey(id, next))) {
        const digit = nextDigit;
        nextDigit += 1;
        closures.set(edgeKey(id, next), digit);
        for (const end of [id, next]) {
          const list = closuresByAtom.get(end) ?? [];
          list.push({ digit, bond });
          closuresByAtom.set(end, list);
        }
      }
    }
  };
  classify(root, -1);

  // pass 2: emit, attaching ring-closure digits at both endpoints
  const emitted = new Set<number>();
  const emit = (id: number, parent: number): string => {
    emitted.add(id);
    let out = atomToken(mol.atoms[id]!);
    for (const { digit, bond } of (closuresByAtom.get(id) ?? []).sort(
      (a, b) => a.digit - b.digit,
    )) {
      out += BOND_SYMBOL[bond.type] + closureToken(digit);
    }
    const treeChildren = neighbors
      .get(id)!
      .filter(
        ({ id: next }) =>
          next !== parent &&
          !emitted.has(next) &&
          !closures.has(edgeKey(id, next)),
      );
    treeChildren.forEach(({ id: next, bond }, index) => {
      const branch = BOND_SYMBOL[bond.type] + emit(next, id);
      out += index < treeChildren.length - 1 ? `(${branch})` : branch;
    });
    return out;
  };
  const smarts = emit(root, -1);
  const maps = component
    .map((id) => mol.atoms[id]!.atomClass)
    .filter((m) => m > 0);
  return {
    minMap: maps.length > 0 ? Math.min(...maps) : Number.POSITIVE_INFINITY,
    smarts,
  };
}

/**
 * Write the selected atoms of a molecule list as dot-joined SMARTS
 * patterns, one per connected component, ordered by smallest atom map.
 */
export function subgraphSmarts(
  molecules: readonly Molecule[],
  selectedKeys: Set<string>,
): string {
  const components: SubgraphComponent[] = [];
  molecules.forEach((mol, molIdx) => {
    const selected: number[] = mol.atoms
      .map((atom: Atom) => atom.id)
      .filter((id: number) => selectedKeys.has(`${molIdx}:${id}`));
    if (selected.length === 0) {
      return;
    }
    const remaining = new Set<number>(selected);
    while (remaining.size > 0) {
      const start = Math.min(...Array.from(remaining));
      const component: number[] = [];
      const queue = [start];
      remaining.delete(start);
      while (queue.length > 0) {
        const id = queue.pop()!;
        component.push(id);
        for (const bond of mol.bonds) {
          let next: number | null = null;
          if (bond.atom1 === id) {
            next = bond.atom2;
          } else if (bond.atom2 === id) {
            next = bond.atom1;
          }
          if (next !== null && remaining.has(next)) {
            remaining.delete(next);
            queue.push(next);
          }
        }
      }
      components.push(writeComponent(mol, component));
    }
  });
  components.sort(
    (a, b) => a.minMap - b.minMap || (a.smarts < b.smarts ? -1 : a.smarts > b.smarts ? 1 : 0),
  );
  return components.map((c) => c.smarts).join(".");
}
