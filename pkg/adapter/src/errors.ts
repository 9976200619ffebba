/** Error types raised by the preparation pipeline. */

export class UnparseableSmilesError extends Error {
  constructor(smiles: string, detail: string) {
    super(`unparseable SMILES ${JSON.stringify(smiles)}: ${detail}`);
    this.name = "UnparseableSmilesError";
  }
}

export class UnmappedReactionError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "UnmappedReactionError";
  }
}

export class ExtractionFailureError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ExtractionFailureError";
  }
}
