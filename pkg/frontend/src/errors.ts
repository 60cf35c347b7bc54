/** Typed errors mirroring the core engine's diagnostic kinds one to one. */

export class CoreError extends Error {
  readonly kind: string;

  constructor(kind: string, message: string) {
    super(message);
    this.name = kind;
    this.kind = kind;
  }
}

/** A referenced file (manifest, table, side store) does not exist. */
export class NotFoundError extends CoreError {
  constructor(message: string) {
    super("NotFoundError", message);
  }
}

/** A manifest or cell could not be parsed; message carries the position. */
export class ParseError extends CoreError {
  constructor(message: string) {
    super("ParseError", message);
  }
}

/** Schema invariants violated, or data does not match the schema. */
export class SchemaError extends CoreError {
  constructor(message: string) {
    super("SchemaError", message);
  }
}

/** Task shape the forest baseline cannot handle (variable-length labels). */
export class UnsupportedTaskError extends CoreError {
  constructor(message: string) {
    super("UnsupportedTaskError", message);
  }
}

/** Invalid argument values passed to a binding call. */
export class ValueError extends CoreError {
  constructor(message: string) {
    super("ValueError", message);
  }
}

/** The dataset handle was closed before the call. */
export class ClosedHandleError extends CoreError {
  constructor(message: string) {
    super("ClosedHandleError", message);
  }
}

const KIND_MAP: Record<string, (msg: string) => CoreError> = {
  FileNotFoundError: (m) => new NotFoundError(m),
  ManifestError: (m) => new ParseError(m),
  ParseError: (m) => new ParseError(m),
  SchemaValidationError: (m) => new SchemaError(m),
  SchemaMismatchError: (m) => new SchemaError(m),
  UnsupportedTaskError: (m) => new UnsupportedTaskError(m),
  ValueError: (m) => new ValueError(m),
};

/** Translate a core CLI diagnostic line into a typed error. */
export function mapDiagnostic(stderr: string, exitCode: number | null): CoreError {
  const match = stderr.match(/error: (\w+): ([\s\S]*)/);
  if (match) {
    const [, kind, message] = match;
    const factory = KIND_MAP[kind];
    return factory ? factory(message.trim()) : new CoreError(kind, message.trim());
  }
  return new CoreError("CoreError", `core exited with code ${exitCode}: ${stderr.trim()}`);
}
