"""Script language and command-line front end."""

from .interpreter import Interpreter, Report, run_text
from .syntax import ScriptError, parse, print_script

__all__ = ["Interpreter", "Report", "ScriptError", "parse", "print_script", "run_text"]
