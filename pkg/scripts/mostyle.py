#!/usr/bin/env python

'''
Motion style transfer, main program
'''
import sys
import os
import faulthandler

import argparse
import logging

import mostyle
import mostyle.config as config
import mostyle.inference as inference
import mostyle.stats as stats
import mostyle.synth as synth
from mostyle.config import ConfigError
from mostyle.tensor import TapeError

LOGGER = logging.getLogger(__name__)

faulthandler.enable()

ARGS = argparse.ArgumentParser(description='Motion style transfer')
ARGS.add_argument('--set', action='append', dest='overrides', help='Section.Key:value override')
ARGS.add_argument('--configfile', action='store')
ARGS.add_argument('--printdefault', action='store_true', help='print the default configuration')
ARGS.add_argument('--printfinal', action='store_true', help='print the final configuration')
ARGS.add_argument('--loglevel', action='store', help='set logging level, default Logging.LoggingLevel')
ARGS.add_argument('--verbose', '-v', action='count', help='set logging level to DEBUG')

SUB = ARGS.add_subparsers(dest='command')


def subcommand(name, summary):
    p = SUB.add_parser(name, help=summary)
    p.add_argument('--config', action='store', dest='command_config', help='YAML config file')
    return p


TRAIN = subcommand('train', 'train a model on Data.Manifest')
TRAIN.add_argument('--resume', action='store', help='continue from a checkpoint')
TRAIN.add_argument('--no-test', action='store_true', help='do not check stats at the end of training')

TRANSFER = subcommand('transfer', 'restyle a content BVH with a style BVH')
TRANSFER.add_argument('--ckpt', action='store', required=True)
TRANSFER.add_argument('--content', action='store', required=True, help='content BVH')
TRANSFER.add_argument('--style', action='store', required=True, help='style BVH')
TRANSFER.add_argument('--out', action='store', required=True, help='output BVH')
TRANSFER.add_argument('--export', action='store', help='directory for attention and feature CSVs')
TRANSFER.add_argument('--content-label', action='store')
TRANSFER.add_argument('--style-label', action='store')

EVALUATE = subcommand('evaluate', 'CC, SC and SC++ over a test manifest')
EVALUATE.add_argument('--ckpt', action='store', required=True)
EVALUATE.add_argument('--test', action='store', help='test manifest, default Data.TestManifest')
EVALUATE.add_argument('--train', action='store', help='training manifest, default Data.Manifest')
EVALUATE.add_argument('--out', action='store', default='.', help='directory for the metrics tables')

FEATURES = subcommand('features', 'dump style features of every clip in a manifest')
FEATURES.add_argument('--ckpt', action='store', required=True)
FEATURES.add_argument('--content', action='store', required=True, help='content BVH')
FEATURES.add_argument('--manifest', action='store', required=True)
FEATURES.add_argument('--out', action='store', default='.')

SYNTH = subcommand('synth-data', 'write a small labeled BVH dataset')
SYNTH.add_argument('--out', action='store', required=True)
SYNTH.add_argument('--frames', action='store', type=int, default=240)
SYNTH.add_argument('--clips', action='store', type=int, default=1, help='clips per style and content')
SYNTH.add_argument('--seed', action='store', type=int, default=0)


def run(args):
    if args.command == 'train':
        trainer = mostyle.Trainer(load=args.resume, no_test=args.no_test)
        trainer.train()
    elif args.command == 'transfer':
        inference.transfer(args.ckpt, args.content, args.style, args.out, export_dir=args.export,
                           content_label=args.content_label, style_label=args.style_label)
    elif args.command == 'evaluate':
        test_manifest = args.test or config.read('Data', 'TestManifest')
        train_manifest = args.train or config.read('Data', 'Manifest')
        if not test_manifest or not train_manifest:
            raise ConfigError('evaluate needs a test manifest and a training manifest')
        inference.evaluate(args.ckpt, test_manifest, train_manifest, args.out)
    elif args.command == 'features':
        inference.features(args.ckpt, args.content, args.manifest, args.out)
    elif args.command == 'synth-data':
        path = synth.write_dataset(args.out, frames=args.frames, clips=args.clips, seed=args.seed)
        LOGGER.info('manifest is %s', path)
    else:
        ARGS.print_help()
        sys.exit(1)


def main():
    '''
    Main program: parse args, read config, run one command.
    '''

    args = ARGS.parse_args()

    if args.printdefault:
        config.print_default()
        sys.exit(1)

    loglevel = os.getenv('MOSTYLE_LOGLEVEL')
    if loglevel is None and args.verbose:
        loglevel = 'DEBUG'
    if loglevel is None and args.loglevel:
        loglevel = args.loglevel

    logging.basicConfig(level=loglevel or 'INFO')

    configfile = getattr(args, 'command_config', None) or args.configfile
    try:
        if args.configfile and getattr(args, 'command_config', None):
            raise ConfigError('give a config file with --configfile or --config, not both')
        config.config(configfile, args.overrides)
    except ConfigError as e:
        LOGGER.error('%s', e)
        sys.exit(1)

    if loglevel is None:
        logging.getLogger().setLevel(config.read('Logging', 'LoggingLevel') or 'INFO')

    if args.printfinal:
        config.print_final()
        sys.exit(1)

    LOGGER.info('mostyle %s', mostyle.__version__)
    try:
        run(args)
    except KeyboardInterrupt:
        sys.stderr.flush()
        print('\nInterrupt. Exiting.\n')
        sys.exit(1)
    except (ValueError, TapeError, FloatingPointError, OSError) as e:
        # ConfigError, BVHParseError, CheckpointError, SamplingError and ShapeError are ValueErrors
        LOGGER.error('%s: %s', type(e).__name__, e)
        sys.exit(1)


if __name__ == '__main__':
    main()
    exit(stats.exitstatus)
