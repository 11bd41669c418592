#!/usr/bin/env python3
"""
Mapping Handler for the srs-weakness MCP tool server
Builds the labeled training set and inspects artifact provenance
"""

import asyncio
from typing import Any

from mcp.types import TextContent

from ..pipeline import format_inspection, inspect_artifact, run_map
from .base_handler import BaseHandler

_CONFIG_PATH = {"type": "string", "description": "Optional JSON run configuration file"}


class MappingHandler(BaseHandler):
    """Handler for weakness-mapping MCP tools"""

    def get_tool_definitions(self) -> list[dict[str, Any]]:
        """Return mapping tool definitions"""
        return [
            {
                "name": "map_requirements",
                "description": "Map every requirement onto its most similar CWE weakness category and write the training set",
                "inputSchema": {
                    "type": "object",
                    "properties": {
                        "cwe_weaknesses": {"type": "string", "description": "CWE weakness CSV (ID, Name, Description)"},
                        "cwe_categories": {"type": "string", "description": "CWE category CSV (CategoryID, CategoryName, MemberID)"},
                        "requirements": {"type": "string", "description": "Requirements CSV"},
                        "output_dir": {"type": "string"},
                        "k": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer"},
                        "weighting": {"type": "string", "enum": ["raw_counts", "tfidf"]},
                        "force": {"type": "boolean", "default": False},
                        "config_path": _CONFIG_PATH,
                    },
                },
            },
            {
                "name": "inspect_artifact",
                "description": "Show the provenance recorded for a training set, report, model file or bundle",
                "inputSchema": {
                    "type": "object",
                    "properties": {"path": {"type": "string"}},
                    "required": ["path"],
                },
            },
        ]

    async def handle_tool_call(self, tool_name: str, arguments: dict[str, Any]) -> list[TextContent]:
        """Route tool calls to appropriate handler methods"""
        try:
            if tool_name == "map_requirements":
                return await self._map_requirements(**arguments)
            elif tool_name == "inspect_artifact":
                return self._inspect_artifact(**arguments)
            else:
                return self._create_error_response(f"Unknown tool: {tool_name}")
        except Exception as e:
            return self._create_error_response(f"Error handling {tool_name}", e)

    async def _map_requirements(self, **params: Any) -> list[TextContent]:
        config = self._load_config(params)
        result = await asyncio.to_thread(run_map, config, bool(params.get("force", False)))
        dataset = result.dataset
        flagged = dataset.flagged_rows()
        details = "\n".join(f"- {path}" for path in result.written)
        return self._create_above_fold_response(
            "SUCCESS",
            f"Mapped {len(dataset)} requirements onto {len(set(dataset.labels))} categories",
            f"k={dataset.provenance['k']}, {len(flagged)} rows below similarity {dataset.low_similarity_threshold}",
            details,
        )

    def _inspect_artifact(self, **params: Any) -> list[TextContent]:
        error = self._validate_required_params(params, ["path"])
        if error:
            return self._create_error_response(error)
        info = inspect_artifact(params["path"])
        return self._create_above_fold_response("INFO", f"{info.get('artifact', 'artifact')} {params['path']}", details=format_inspection(info))
