#!/usr/bin/env python3
"""
Base Handler class for the srs-weakness MCP tool server
Provides common response formatting and configuration loading for all tool handlers
"""

import logging
from abc import ABC, abstractmethod
from typing import Any

from mcp.types import TextContent

from ..config import RunConfig, load_config
from ..errors import SrsWeaknessError

logger = logging.getLogger(__name__)

# Tool argument name -> (config section, config key)
COMMON_ARGUMENTS: dict[str, tuple[str, str]] = {
    "output_dir": ("paths", "output_dir"),
    "dataset": ("paths", "dataset"),
    "cwe_weaknesses": ("paths", "cwe_weaknesses"),
    "cwe_categories": ("paths", "cwe_categories"),
    "requirements": ("paths", "requirements"),
    "bundle_dir": ("paths", "bundle_dir"),
    "k": ("lsa", "k"),
    "seed": ("lsa", "seed"),
    "weighting": ("text", "weighting"),
}


class BaseHandler(ABC):
    """Abstract base class for all MCP tool handlers"""

    def __init__(self) -> None:
        self.logger = logger.getChild(self.__class__.__name__)

    def _create_response(self, text: str) -> list[TextContent]:
        """Create standardized response format"""
        return [TextContent(type="text", text=text)]

    def _create_above_fold_response(
        self, status: str, key_info: str, action_info: str = "", details: str = ""
    ) -> list[TextContent]:
        """Create above-the-fold optimized response format

        Args:
            status: Status indicator (SUCCESS/ERROR/INFO)
            key_info: Most important information (counts, accuracy)
            action_info: Written files or next steps (optional)
            details: Detailed information for expansion (optional)
        """
        lines = [f"[{status}] {key_info}"]
        if action_info:
            lines.append(action_info)
        if details:
            lines.append("")
            lines.append(details)
        return [TextContent(type="text", text="\n".join(lines))]

    def _create_error_response(self, error_msg: str, exception: Exception | None = None) -> list[TextContent]:
        """Create standardized error response; pipeline errors keep their code"""
        if isinstance(exception, SrsWeaknessError):
            self.logger.warning(f"{error_msg}: {exception.code}: {exception}")
            return self._create_above_fold_response("ERROR", f"{exception.code}: {exception}", error_msg)
        if exception:
            self.logger.error(f"{error_msg}: {str(exception)}")
            return self._create_above_fold_response("ERROR", f"{error_msg}: {str(exception)}")
        self.logger.error(error_msg)
        return self._create_above_fold_response("ERROR", error_msg)

    def _validate_required_params(self, params: dict[str, Any], required_fields: list[str]) -> str | None:
        """Validate that required parameters are present"""
        missing = [field for field in required_fields if field not in params or params[field] is None]
        if missing:
            return f"Missing required parameters: {', '.join(missing)}"
        return None

    def _load_config(self, arguments: dict[str, Any], extra: dict[str, Any] | None = None) -> RunConfig:
        """RunConfig from an optional config_path argument plus per-call overrides"""
        overrides: dict[str, Any] = {}
        for name, (section, key) in COMMON_ARGUMENTS.items():
            if arguments.get(name) is not None:
                overrides.setdefault(section, {})[key] = arguments[name]
        if arguments.get("seed") is not None:
            overrides.setdefault("mlp", {})["seed"] = arguments["seed"]
        for section, values in (extra or {}).items():
            for key, value in values.items():
                if value is not None:
                    overrides.setdefault(section, {})[key] = value
        return load_config(arguments.get("config_path"), overrides)

    @abstractmethod
    def get_tool_definitions(self) -> list[dict[str, Any]]:
        """Return list of tool definitions this handler provides"""
        pass

    @abstractmethod
    async def handle_tool_call(self, tool_name: str, arguments: dict[str, Any]) -> list[TextContent]:
        """Handle a tool call for this handler's domain"""
        pass
