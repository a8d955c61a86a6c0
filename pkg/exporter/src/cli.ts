#!/usr/bin/env node
/**
 * betkit-export: encode an image directory plus concept and class word
 * lists into the NPY + JSON dataset bundle.
 *
 * Exit codes mirror the consumer CLI: 0 on success, 2 for bad
 * configuration, 3 for data problems.
 */

import { readFileSync, realpathSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';

import { ConfigError, DataError } from './errors.js';
import { DEFAULT_TEMPLATE, ExportJob, runExport } from './export.js';

const USAGE = `usage: betkit-export --model ID --images DIR --concepts words.txt --classes classes.txt --out manifest.json

options:
  --model ID           model identifier, e.g. toy:512
  --images DIR         directory of images to encode
  --concepts FILE      concept words, one per line
  --classes FILE       class names, one per line
  --out FILE           output manifest path; arrays are written next to it
  --template TPL       class prompt template (default "${DEFAULT_TEMPLATE}")
  --concept-template TPL
                       optional concept prompt template with <CONCEPT>
  --score-mode MODE    logit or softmax (default logit)
  --temperature T      softmax temperature (default 1.0)
  -h, --help           show this message
`;

function readWordList(file: string, what: string): string[] {
  let text: string;
  try {
    text = readFileSync(file, 'utf8');
  } catch (err) {
    throw new DataError(`cannot read ${what} list ${file}: ${(err as Error).message}`);
  }
  return text
    .split('\n')
    .map(line => line.trim())
    .filter(line => line.length > 0);
}

export function jobFromArgv(argv: string[]): ExportJob | null {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        model: { type: 'string' },
        images: { type: 'string' },
        concepts: { type: 'string' },
        classes: { type: 'string' },
        out: { type: 'string' },
        template: { type: 'string' },
        'concept-template': { type: 'string' },
        'score-mode': { type: 'string' },
        temperature: { type: 'string' },
        help: { type: 'boolean', short: 'h' },
      },
    });
  } catch (err) {
    throw new ConfigError((err as Error).message);
  }
  const values = parsed.values;
  if (values.help) {
    return null;
  }
  for (const required of ['model', 'images', 'concepts', 'classes', 'out'] as const) {
    if (values[required] === undefined) {
      throw new ConfigError(`--${required} is required`);
    }
  }
  const temperature = values.temperature === undefined ? undefined : Number(values.temperature);
  if (temperature !== undefined && !Number.isFinite(temperature)) {
    throw new ConfigError(`temperature must be a number, got '${values.temperature}'`);
  }
  return {
    model: values.model!,
    imageDir: values.images!,
    concepts: readWordList(values.concepts!, 'concept'),
    classes: readWordList(values.classes!, 'class'),
    template: values.template,
    conceptTemplate: values['concept-template'],
    scoreMode: values['score-mode'] as ExportJob['scoreMode'],
    temperature,
    outPath: values.out!,
  };
}

async function main(): Promise<number> {
  let job: ExportJob | null;
  try {
    job = jobFromArgv(process.argv.slice(2));
  } catch (err) {
    if (err instanceof ConfigError || err instanceof DataError) {
      console.error(`betkit-export: ${err.message}`);
      return err instanceof ConfigError ? 2 : 3;
    }
    throw err;
  }
  if (job === null) {
    process.stdout.write(USAGE);
    return 0;
  }
  try {
    const summary = await runExport(job);
    console.log(
      `wrote ${summary.manifestPath}: ${summary.rows} embeddings of dim ${summary.dim}, ` +
        `${summary.concepts} concepts, ${summary.classes} classes` +
        (summary.skipped.length > 0 ? `, skipped ${summary.skipped.length}` : '')
    );
    return 0;
  } catch (err) {
    if (err instanceof ConfigError) {
      console.error(`betkit-export: ${err.message}`);
      return 2;
    }
    if (err instanceof DataError) {
      console.error(`betkit-export: ${err.message}`);
      return 3;
    }
    throw err;
  }
}

function invokedAsScript(): boolean {
  if (process.argv[1] === undefined) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}

if (invokedAsScript()) {
  main().then(
    code => process.exit(code),
    err => {
      console.error(err);
      process.exit(1);
    }
  );
}
