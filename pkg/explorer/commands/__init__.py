"""Commands package initialization."""
import argparse

from explorer.commands import explore, export, genworld, precompute

COMMANDS = (precompute, explore, genworld, export)


def register_commands(subparsers: "argparse._SubParsersAction") -> None:
    for command in COMMANDS:
        command.register(subparsers)
