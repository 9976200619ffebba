export { canonicalize } from "./canonicalize.js";
export {
  ExtractionFailureError,
  UnmappedReactionError,
  UnparseableSmilesError,
} from "./errors.js";
export {
  canonicalReactionSmiles,
  extractTemplate,
  type MappedReaction,
} from "./template.js";
export {
  renderRouteFile,
  tokenizeRouteFile,
  type TokenizeSummary,
} from "./tokenize.js";
