"""
LaneBench CLI
=============

Command-line entry point.

Usage:
    python -m lanebench.cli campaign --config campaign.json --out runs/c1 --jobs 4
    python -m lanebench.cli sample --seed 7 --count 50
    python -m lanebench.cli analyze --out runs/c1
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from lanebench.core.config import settings
from lanebench.core.exceptions import ConfigError, LaneBenchError, MissingInputError
from lanebench.core.logging import setup_logging
from lanebench.schemas.campaign import CampaignConfig
from lanebench.services import campaign_service

COMMANDS = {
    "sample": (campaign_service.cmd_sample, "Sample scenarios from the domain models"),
    "dataset": (campaign_service.cmd_dataset, "Generate simulated datasets and the pseudo-real recording"),
    "train": (campaign_service.cmd_train, "Train the learned controller"),
    "offline": (campaign_service.cmd_offline, "Evaluate the controller open-loop (MAE/RMSE)"),
    "online": (campaign_service.cmd_online, "Evaluate the controller closed-loop (MDCL)"),
    "match": (campaign_service.cmd_match, "Match simulated datasets against the recording"),
    "analyze": (campaign_service.cmd_analyze, "Classify verdicts and write the report"),
    "campaign": (campaign_service.cmd_campaign, "Run every step in order"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Campaign configuration JSON file")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--jobs", type=int, help="Parallel workers")
    common.add_argument("--count", type=int, help="Number of evaluation scenarios")
    common.add_argument("--log-level", default=settings.LOG_LEVEL, help="Console log level")
    common.add_argument("--log-file", default=settings.LOG_FILE, help="Optional rotating log file")

    parser = argparse.ArgumentParser(
        prog="lanebench",
        description="Offline vs online testing bench for lane-keeping controllers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def load_config(args: argparse.Namespace) -> CampaignConfig:
    """Config file values, overridden by flags."""
    data: Dict[str, Any] = {}
    if args.config is not None:
        if not args.config.exists():
            raise MissingInputError(f"config file not found: {args.config}", path=str(args.config))
        try:
            data = json.loads(args.config.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {args.config} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")

    flags = {"seed": args.seed, "output_dir": args.out, "jobs": args.jobs, "scenario_count": args.count}
    data.update({k: v for k, v in flags.items() if v is not None})
    try:
        return CampaignConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid campaign configuration: {e}") from e


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ConfigError.exit_code if e.code else 0

    setup_logging(args.log_level, args.log_file)
    command, _ = COMMANDS[args.command]
    try:
        config = load_config(args)
        logger.info(f"{args.command}: seed={config.seed} out={config.output_dir} jobs={config.jobs}")
        result = command(config)
    except LaneBenchError as e:
        logger.error(f"{args.command} failed: {e.message}")
        print(json.dumps(e.to_dict(), sort_keys=True), file=sys.stderr)
        return e.exit_code

    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
