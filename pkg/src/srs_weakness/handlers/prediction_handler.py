#!/usr/bin/env python3
"""
Prediction Handler for the srs-weakness MCP tool server
Labels requirements with weakness categories using a saved bundle
"""

import asyncio
from typing import Any

from mcp.types import TextContent

from ..bundle import load_bundle
from ..pipeline import run_predict
from .base_handler import BaseHandler


class PredictionHandler(BaseHandler):
    """Handler for weakness prediction MCP tools"""

    def get_tool_definitions(self) -> list[dict[str, Any]]:
        """Return prediction tool definitions"""
        return [
            {
                "name": "predict_weaknesses",
                "description": "Predict the CWE weakness category of requirements, given inline or as an SRS file",
                "inputSchema": {
                    "type": "object",
                    "properties": {
                        "bundle_dir": {"type": "string", "description": "Bundle directory written by train_bundle"},
                        "requirements": {"type": "array", "items": {"type": "string"}},
                        "srs_file": {"type": "string", "description": "One requirement per line, or the requirements CSV"},
                        "output": {"type": "string", "description": "Prediction CSV, required with srs_file"},
                        "force": {"type": "boolean", "default": False},
                    },
                    "required": ["bundle_dir"],
                },
            }
        ]

    async def handle_tool_call(self, tool_name: str, arguments: dict[str, Any]) -> list[TextContent]:
        """Route tool calls to appropriate handler methods"""
        try:
            if tool_name == "predict_weaknesses":
                return await self._predict_weaknesses(**arguments)
            else:
                return self._create_error_response(f"Unknown tool: {tool_name}")
        except Exception as e:
            return self._create_error_response(f"Error handling {tool_name}", e)

    async def _predict_weaknesses(self, **params: Any) -> list[TextContent]:
        error = self._validate_required_params(params, ["bundle_dir"])
        if error:
            return self._create_error_response(error)

        if params.get("srs_file"):
            if not params.get("output"):
                return self._create_error_response("Missing required parameters: output")
            result = await asyncio.to_thread(
                run_predict, params["bundle_dir"], params["srs_file"], params["output"], bool(params.get("force", False))
            )
            return self._create_above_fold_response(
                "SUCCESS", f"Predicted {result.n_predictions} requirements", f"Wrote {result.output}"
            )

        texts = [str(text) for text in params.get("requirements") or []]
        if not texts:
            return self._create_error_response("Provide either requirements or srs_file")
        bundle = await asyncio.to_thread(load_bundle, params["bundle_dir"])
        labels = bundle.predict(texts)
        lines = [
            f"{i}. [{label}] {bundle.category_name(label) or 'unnamed category'} <- {text}"
            for i, (text, label) in enumerate(zip(texts, labels, strict=True), start=1)
        ]
        return self._create_above_fold_response(
            "SUCCESS", f"Predicted {len(texts)} requirements", details="\n".join(lines)
        )
