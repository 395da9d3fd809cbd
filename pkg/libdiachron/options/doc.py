#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
diachron version %s

diachron trains one small language model per time slice of a dated
corpus and contrasts the resulting battery of models: cross-time
perplexity, filtered minimal pairs, cloze leakage and trajectory
discovery.

Usage:
 diachron run <stage> [options]
 diachron validate [options]
 diachron decode --prefix-file=FILE [options]
 diachron synth <directory> [options]
 diachron (-h | --help)
 diachron --version

Arguments:
 <stage>                     one of the pipeline stages: ingest, slice,
                             split, tokenize, train-teachers, distill,
                             eval-ppl, eval-pairs, build-cloze, eval-cloze,
                             leakage, discover, attribute, or 'all' to run
                             every stage in order.
 <directory>                 directory into which a synthetic corpus, sense
                             inventory, minimal pairs and configuration are
                             generated.

Options:
 -c, --config=FILE           pipeline configuration file
                             [default: diachron.json]
 -s, --slice=LABEL           restrict a stage, or decoding, to one slice
 -f, --force                 run a stage even when its manifest is current
 -i, --itemize-changes       output a change-summary for every stage
 -v, --verbose               enable verbose output
     --debug                 enable debug output
 -q, --quiet                 suppress non-error messages
     --prefix-file=FILE      file of prefixes to decode, one per line
 -o, --output=FILE           write decoded rows to FILE instead of stdout
 -k, --top-k=NUM             number of completions per prefix
     --beam-width=NUM        beam width used by the one-word decoder
     --model=KIND            decode with 'teacher' or 'student' models
                             [default: student]
     --preset=NAME           synthetic preset, 'tiny' or 'acceptance'
                             [default: tiny]
     --seed=NUM              seed for the synthetic generator [default: 0]
 -h, --help                  show this help
     --version               print version number

Exit status:

   0 on success, 1 when the configuration fails validation and 2 when a
   stage fails.

Environment variables:

   The configuration directory defaults to $HOME/.diachron.  This path can
   be overridden by specifying the environment variable DIACHRON_CONFIG_DIR.
   A relative --config path that does not exist in the working directory
   is looked up there.

   Individual configuration files can also be overridden by substituting
   any non-alphanumeric character in the filename with an underscore and
   adding the DIACHRON_ prefix.  For example, to override diachron.json,
   specify an environment variable named DIACHRON_DIACHRON_JSON.

   DIACHRON_ENDPOINT_URL, DIACHRON_ENDPOINT_KEY and DIACHRON_ENDPOINT_MODEL
   configure the text-generation endpoint used by the attribute stage.

   DIACHRON_DEBUG=1 enables debug output before options are parsed.
"""
