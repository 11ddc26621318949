#!/usr/bin/env node
// SMT-LIB v2 REPL over stdin/stdout backed by the z3 wasm build.
//
// Commands accumulate until the parenthesis depth returns to zero, then the
// complete batch is handed to Z3's SMT-LIB interpreter on one persistent
// context, so incremental (push)/(pop) state carries across batches. Any
// SMT-LIB v2 solver binary can replace this shim; it exists so the engine
// works in environments without a native solver.
//
// Flake containment: the wasm build's SMT-LIB scanner occasionally corrupts
// its state under async scheduling and rejects well-formed input (the same
// bytes replay cleanly). When a batch comes back with (error ...), the shim
// rebuilds the context, silently replays every batch that previously
// succeeded, and re-runs the current batch. Only errors that survive the
// replays — i.e. genuine ones — are reported to the client.
'use strict';

const { init } = require('z3-solver');

const HISTORY_CAP = 4 * 1024 * 1024; // stop replay-repair on huge sessions
const REPAIR_ATTEMPTS = 3;

(async () => {
  const { Z3 } = await init();
  const fresh = () => Z3.mk_context(Z3.mk_config());
  let ctx = fresh();
  const history = [];
  let historyBytes = 0;

  const out = (s) => process.stdout.write(s);
  const isError = (r) => typeof r === 'string' && r.trimStart().startsWith('(error');

  async function evalRaw(text) {
    try {
      const r = await Z3.eval_smtlib2_string(ctx, text);
      return r || '';
    } catch (e) {
      return '(error "' + String(e).replace(/"/g, "'") + '")';
    }
  }

  async function evalChunk(text) {
    let r = await evalRaw(text);
    for (let attempt = 0; isError(r) && attempt < REPAIR_ATTEMPTS; attempt++) {
      if (historyBytes > HISTORY_CAP) break;
      try { Z3.del_context(ctx); } catch (_) { /* keep going on a fresh one */ }
      ctx = fresh();
      if (history.length) {
        const replay = await evalRaw(history.join(''));
        if (isError(replay)) { r = replay; continue; } // replay flaked too; again
      }
      r = await evalRaw(text);
    }
    if (!isError(r)) {
      history.push(text);
      historyBytes += text.length;
    }
    if (r.length) out(r.endsWith('\n') ? r : r + '\n');
  }

  let buf = '';
  let depth = 0;
  let scanned = 0;
  let inString = false;
  let pending = Promise.resolve();

  process.stdin.setEncoding('utf8');
  process.stdin.on('data', (chunk) => {
    buf += chunk;
    let lastComplete = -1;
    for (let i = scanned; i < buf.length; i++) {
      const c = buf[i];
      if (inString) {
        if (c === '"') inString = false;
        continue;
      }
      if (c === '"') inString = true;
      else if (c === '(') depth++;
      else if (c === ')') {
        depth--;
        if (depth === 0) lastComplete = i;
      }
    }
    scanned = buf.length;
    if (depth === 0 && lastComplete >= 0) {
      const text = buf.slice(0, lastComplete + 1);
      buf = buf.slice(lastComplete + 1);
      scanned = 0;
      pending = pending.then(() => evalChunk(text));
    }
  });
  process.stdin.on('end', () => {
    pending.then(() => process.exit(0));
  });
})().catch((e) => {
  process.stderr.write('z3pipe: ' + String(e) + '\n');
  process.exit(1);
});
