/** Error taxonomy mirrored on the consumer's CLI: config problems exit 2, data problems exit 3. */

export class ConfigError extends Error {}

export class DataError extends Error {}
