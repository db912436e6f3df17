"""
Preset manager: discovers platform and network presets shipped as
``presets/<Name>/preset-manifest.json``.
"""
import json
from pathlib import Path
from typing import Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from sparseconv.errors import GeometryError, PresetError
from sparseconv.models.layer import LayerSpec, NamedLayer
from sparseconv.models.profile import PlatformProfile

PRESET_TYPES = ("platform", "network")
_LAYER_KEYS = {"N": "N", "C": "C", "R": "R", "S": "S", "H": "H_in", "W": "W_in", "stride": "stride", "pad": "pad"}


class PresetManager:
    """Loads manifests once and answers lookups case-insensitively."""

    def __init__(self, preset_dir: Optional[Path] = None):
        self.preset_dir = Path(preset_dir) if preset_dir else Path(__file__).parent / "presets"
        self.manifest_filename = "preset-manifest.json"
        self.manifests: Dict[str, dict] = {}
        self.platforms: Dict[str, PlatformProfile] = {}
        self.networks: Dict[str, List[NamedLayer]] = {}
        self._loaded = False

    def load_presets(self) -> None:
        """Discover and validate every manifest under the preset directory."""
        logger.debug(f"[PresetManager] Starting preset discovery in {self.preset_dir}")
        self.manifests.clear()
        self.platforms.clear()
        self.networks.clear()

        folders = sorted(f for f in self.preset_dir.iterdir() if f.is_dir()) if self.preset_dir.is_dir() else []
        for folder in folders:
            manifest_path = folder / self.manifest_filename
            if not manifest_path.exists():
                continue
            try:
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as e:
                logger.warning(f"[PresetManager] Invalid JSON in {manifest_path}: {e}")
                continue

            required_fields = ["name", "presetType"]
            if not all(field in manifest for field in required_fields):
                logger.warning(f"[PresetManager] Invalid manifest in {folder.name}: Missing fields.")
                continue
            if manifest["presetType"] not in PRESET_TYPES:
                logger.warning(f"[PresetManager] Unknown presetType '{manifest['presetType']}' in {folder.name}")
                continue
            key = manifest["name"].lower()
            if key in self.manifests:
                logger.warning(f"[PresetManager] Duplicate preset name '{manifest['name']}' in {folder.name}. Skipping.")
                continue

            try:
                if manifest["presetType"] == "platform":
                    self.platforms[key] = self._platform_from(manifest)
                else:
                    self.networks[key] = self._network_from(manifest)
            except (ValidationError, GeometryError, KeyError, TypeError) as e:
                logger.warning(f"[PresetManager] Error loading preset from {folder.name}: {e}")
                continue

            manifest["basePath"] = str(folder)
            self.manifests[key] = manifest
            logger.debug(
                f"[PresetManager] Loaded manifest: {manifest.get('displayName', manifest['name'])} "
                f"({manifest['name']}, Type: {manifest['presetType']})"
            )

        self._loaded = True
        logger.debug(f"[PresetManager] Preset discovery finished. Loaded {len(self.manifests)} presets.")

    @staticmethod
    def _platform_from(manifest: dict) -> PlatformProfile:
        return PlatformProfile(name=manifest["name"], **manifest["platform"])

    @staticmethod
    def _network_from(manifest: dict) -> List[NamedLayer]:
        layers = []
        for entry in manifest["layers"]:
            fields = {target: entry[source] for source, target in _LAYER_KEYS.items() if source in entry}
            layers.append(NamedLayer(name=entry["name"], kind=entry.get("kind", "conv"), spec=LayerSpec(**fields)))
        if not layers:
            raise KeyError("network preset has no layers")
        return layers

    def _ensure_loaded(self) -> None:
        if not self._loaded:
            self.load_presets()

    # ==================== Lookups ====================

    def platform(self, name: str) -> PlatformProfile:
        self._ensure_loaded()
        try:
            return self.platforms[name.lower()]
        except KeyError:
            raise PresetError(name, f"unknown platform '{name}', available: {sorted(self.platforms)}") from None

    def network(self, name: str) -> List[NamedLayer]:
        self._ensure_loaded()
        try:
            return list(self.networks[name.lower()])
        except KeyError:
            raise PresetError(name, f"unknown network '{name}', available: {sorted(self.networks)}") from None

    def layer(self, key: str) -> NamedLayer:
        """``"<network>-<layer>"``, e.g. ``alexnet-conv5``."""
        network, sep, layer_name = key.partition("-")
        if not sep:
            raise PresetError(key, f"layer preset must look like '<network>-<layer>', got '{key}'")
        for layer in self.network(network):
            if layer.name.lower() == layer_name.lower():
                return layer
        raise PresetError(key, f"network '{network}' has no layer '{layer_name}'")

    def resolve_layer(self, text: str) -> NamedLayer:
        """A layer spec string (``N=..,C=..``) or a layer preset key."""
        if "=" in text:
            spec = LayerSpec.parse(text)
            return NamedLayer(name=spec.describe(), spec=spec, kind="fc" if spec.is_fc else "conv")
        return self.layer(text.strip())

    def resolve_platform(self, text: str) -> PlatformProfile:
        """A preset name or a profile JSON path."""
        path = Path(text)
        if path.suffix == ".json" or path.exists():
            try:
                return PlatformProfile.from_json_file(path)
            except (OSError, ValidationError) as e:
                raise PresetError(text, f"cannot load profile {text}: {e}") from e
        return self.platform(text)

    def list_presets(self) -> Dict[str, List[str]]:
        self._ensure_loaded()
        return {"platform": sorted(self.platforms), "network": sorted(self.networks)}


preset_manager = PresetManager()
