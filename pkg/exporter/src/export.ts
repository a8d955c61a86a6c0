/**
 * Export pipeline: encode images, concept words and class prompts,
 * then write the dataset bundle consumed by the analysis package.
 *
 * The bundle is three NPY files plus a JSON manifest: embeddings with
 * one unit row per readable image, a concept dictionary with one unit
 * column per concept word, and a zero-shot classifier with one unit
 * row per class prompt. Images that cannot be decoded are skipped
 * with a warning and left out of the manifest ids.
 */

import { mkdir, readFile, readdir, writeFile } from 'node:fs/promises';
import * as path from 'node:path';

import { ModelAdapter, UnreadableImageError, loadAdapter } from './adapter.js';
import { ConfigError, DataError } from './errors.js';
import { encodeNpy } from './npy.js';

export const CLASS_PLACEHOLDER = '<CLASS_NAME>';
export const CONCEPT_PLACEHOLDER = '<CONCEPT>';
export const DEFAULT_TEMPLATE = 'A photo of a <CLASS_NAME>';

export interface ExportJob {
  model: string;
  imageDir: string;
  concepts: string[];
  classes: string[];
  /** Class prompt template; must contain the class placeholder. */
  template?: string;
  /** Optional concept prompt template; raw words are the default. */
  conceptTemplate?: string;
  scoreMode?: 'logit' | 'softmax';
  temperature?: number;
  outPath: string;
}

export interface ExportSummary {
  manifestPath: string;
  rows: number;
  dim: number;
  concepts: number;
  classes: number;
  skipped: string[];
}

export function validateJob(job: ExportJob): void {
  if (job.concepts.length === 0) {
    throw new ConfigError('concept list is empty');
  }
  if (job.classes.length === 0) {
    throw new ConfigError('class list is empty');
  }
  if (new Set(job.concepts).size !== job.concepts.length) {
    throw new ConfigError('concept names must be unique');
  }
  const template = job.template ?? DEFAULT_TEMPLATE;
  if (!template.includes(CLASS_PLACEHOLDER)) {
    throw new ConfigError(`class template must contain ${CLASS_PLACEHOLDER}`);
  }
  if (job.conceptTemplate !== undefined && !job.conceptTemplate.includes(CONCEPT_PLACEHOLDER)) {
    throw new ConfigError(`concept template must contain ${CONCEPT_PLACEHOLDER}`);
  }
  if (job.scoreMode !== undefined && job.scoreMode !== 'logit' && job.scoreMode !== 'softmax') {
    throw new ConfigError(`score mode must be logit or softmax, got '${job.scoreMode}'`);
  }
  if (job.temperature !== undefined && !(job.temperature > 0)) {
    throw new ConfigError(`temperature must be positive, got ${job.temperature}`);
  }
}

function normalized(vec: Float64Array, what: string): Float64Array {
  let sq = 0;
  for (const v of vec) {
    if (!Number.isFinite(v)) throw new DataError(`${what} embedding contains non-finite values`);
    sq += v * v;
  }
  const norm = Math.sqrt(sq);
  if (norm === 0) throw new DataError(`${what} embedding is a zero vector`);
  const out = new Float64Array(vec.length);
  for (let i = 0; i < vec.length; i++) out[i] = vec[i] / norm;
  return out;
}

export async function exportEmbeddings(
  job: ExportJob,
  adapter: ModelAdapter
): Promise<{ data: Float64Array; ids: string[]; skipped: string[] }> {
  let entries;
  try {
    entries = await readdir(job.imageDir, { withFileTypes: true });
  } catch (err) {
    throw new DataError(`cannot read image directory ${job.imageDir}: ${(err as Error).message}`);
  }
  const names = entries
    .filter(e => e.isFile() && !e.name.startsWith('.'))
    .map(e => e.name)
    .sort();

  const rows: Float64Array[] = [];
  const ids: string[] = [];
  const skipped: string[] = [];
  for (const name of names) {
    try {
      const bytes = await readFile(path.join(job.imageDir, name));
      rows.push(normalized(await adapter.encodeImage(bytes), `image ${name}`));
      ids.push(name);
    } catch (err) {
      if (err instanceof UnreadableImageError || (err as NodeJS.ErrnoException).code) {
        console.warn(`skipping unreadable image ${name}: ${(err as Error).message}`);
        skipped.push(name);
      } else {
        throw err;
      }
    }
  }
  if (rows.length === 0) {
    throw new DataError(`no readable images in ${job.imageDir}`);
  }
  const data = new Float64Array(rows.length * adapter.dim);
  rows.forEach((row, i) => data.set(row, i * adapter.dim));
  return { data, ids, skipped };
}

export async function exportConcepts(job: ExportJob, adapter: ModelAdapter): Promise<Float64Array> {
  const d = adapter.dim;
  const m = job.concepts.length;
  const data = new Float64Array(d * m);
  for (let j = 0; j < m; j++) {
    const prompt =
      job.conceptTemplate === undefined
        ? job.concepts[j]
        : job.conceptTemplate.replaceAll(CONCEPT_PLACEHOLDER, job.concepts[j]);
    const vec = normalized(await adapter.encodeText(prompt), `concept ${job.concepts[j]}`);
    for (let i = 0; i < d; i++) data[i * m + j] = vec[i];
  }
  return data;
}

export async function exportClassifier(job: ExportJob, adapter: ModelAdapter): Promise<Float64Array> {
  const template = job.template ?? DEFAULT_TEMPLATE;
  const data = new Float64Array(job.classes.length * adapter.dim);
  for (let i = 0; i < job.classes.length; i++) {
    const prompt = template.replaceAll(CLASS_PLACEHOLDER, job.classes[i]);
    data.set(normalized(await adapter.encodeText(prompt), `class ${job.classes[i]}`), i * adapter.dim);
  }
  return data;
}

export async function runExport(job: ExportJob): Promise<ExportSummary> {
  validateJob(job);
  const adapter = loadAdapter(job.model);

  const embeddings = await exportEmbeddings(job, adapter);
  const concepts = await exportConcepts(job, adapter);
  const classifier = await exportClassifier(job, adapter);

  const outDir = path.dirname(path.resolve(job.outPath));
  await mkdir(outDir, { recursive: true });
  const n = embeddings.ids.length;
  await writeFile(path.join(outDir, 'embeddings.npy'), encodeNpy(embeddings.data, n, adapter.dim));
  await writeFile(
    path.join(outDir, 'concepts.npy'),
    encodeNpy(concepts, adapter.dim, job.concepts.length)
  );
  await writeFile(
    path.join(outDir, 'classifier.npy'),
    encodeNpy(classifier, job.classes.length, adapter.dim)
  );

  const manifest = {
    version: 1,
    embeddings: { path: 'embeddings.npy', rows: n, dim: adapter.dim, ids: embeddings.ids },
    concepts: { path: 'concepts.npy', dim: adapter.dim, names: job.concepts },
    classifier: {
      path: 'classifier.npy',
      classes: job.classes,
      score_mode: job.scoreMode ?? 'logit',
      temperature: job.temperature ?? 1.0,
    },
  };
  await writeFile(path.resolve(job.outPath), JSON.stringify(manifest, null, 2) + '\n');

  return {
    manifestPath: path.resolve(job.outPath),
    rows: n,
    dim: adapter.dim,
    concepts: job.concepts.length,
    classes: job.classes.length,
    skipped: embeddings.skipped,
  };
}
