#!/usr/bin/env python3
"""
Experiment Handler for the srs-weakness MCP tool server
Runs the classifier comparison and trains prediction bundles
"""

import asyncio
from typing import Any

from mcp.types import TextContent

from ..classifiers.registry import ALGORITHMS
from ..pipeline import run_experiment_command, run_train
from .base_handler import BaseHandler


class ExperimentHandler(BaseHandler):
    """Handler for experiment and training MCP tools"""

    def get_tool_definitions(self) -> list[dict[str, Any]]:
        """Return experiment tool definitions"""
        return [
            {
                "name": "run_experiment",
                "description": "Train and score classifiers over train/test split fractions and seeds",
                "inputSchema": {
                    "type": "object",
                    "properties": {
                        "dataset": {"type": "string", "description": "Training-set CSV written by map_requirements"},
                        "output_dir": {"type": "string"},
                        "algorithms": {"type": "array", "items": {"type": "string", "enum": list(ALGORITHMS)}},
                        "fractions": {"type": "array", "items": {"type": "number"}},
                        "seeds": {"type": "array", "items": {"type": "integer"}},
                        "feature_kind": {"type": "string", "enum": ["latent", "counts", "tfidf"]},
                        "force": {"type": "boolean", "default": False},
                        "config_path": {"type": "string"},
                    },
                },
            },
            {
                "name": "train_bundle",
                "description": "Train one classifier on the whole training set and save a prediction bundle",
                "inputSchema": {
                    "type": "object",
                    "properties": {
                        "dataset": {"type": "string"},
                        "algorithm": {"type": "string", "enum": list(ALGORITHMS), "default": "mlp"},
                        "feature_kind": {"type": "string", "enum": ["latent", "counts", "tfidf"]},
                        "bundle_dir": {"type": "string"},
                        "output_dir": {"type": "string"},
                        "cwe_weaknesses": {"type": "string"},
                        "cwe_categories": {"type": "string"},
                        "seed": {"type": "integer"},
                        "force": {"type": "boolean", "default": False},
                        "config_path": {"type": "string"},
                    },
                },
            },
        ]

    async def handle_tool_call(self, tool_name: str, arguments: dict[str, Any]) -> list[TextContent]:
        """Route tool calls to appropriate handler methods"""
        try:
            if tool_name == "run_experiment":
                return await self._run_experiment(**arguments)
            elif tool_name == "train_bundle":
                return await self._train_bundle(**arguments)
            else:
                return self._create_error_response(f"Unknown tool: {tool_name}")
        except Exception as e:
            return self._create_error_response(f"Error handling {tool_name}", e)

    async def _run_experiment(self, **params: Any) -> list[TextContent]:
        config = self._load_config(
            params,
            {
                "experiment": {
                    "algorithms": params.get("algorithms"),
                    "fractions": params.get("fractions"),
                    "seeds": params.get("seeds"),
                    "feature_kind": params.get("feature_kind"),
                }
            },
        )
        result = await asyncio.to_thread(run_experiment_command, config, bool(params.get("force", False)))
        report = result.report
        failed = [cell for cell in report.cells if not cell.ok]
        best = max(
            (a for a in report.algorithms if report.mean_accuracy(a) is not None),
            key=lambda a: report.mean_accuracy(a) or 0.0,
            default=None,
        )
        key_info = f"Ran {len(report.cells)} cells, {len(failed)} FAILED"
        if best is not None:
            key_info += f"; best {best} mean accuracy {report.mean_accuracy(best):.4f}"
        return self._create_above_fold_response(
            "SUCCESS",
            key_info,
            "Wrote " + ", ".join(str(path) for path in result.written),
            report.summary_text(),
        )

    async def _train_bundle(self, **params: Any) -> list[TextContent]:
        config = self._load_config(
            params, {"train": {"algorithm": params.get("algorithm"), "feature_kind": params.get("feature_kind")}}
        )
        bundle = await asyncio.to_thread(run_train, config, bool(params.get("force", False)))
        manifest = bundle.manifest
        return self._create_above_fold_response(
            "SUCCESS",
            f"Trained {manifest['algorithm']} bundle ({manifest['feature_kind']}, {manifest['n_features']} features)",
            f"Saved to {config.bundle_path}",
        )
