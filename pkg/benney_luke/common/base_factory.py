from typing import Dict, Generic, Optional, Type, TypeVar
from types import ModuleType
import importlib
import inspect
import pkgutil
from pydantic import BaseModel, ConfigDict, Field
from benney_luke.common.logging_config import internal_logger
from benney_luke.common.error import BLError, Code

T = TypeVar("T")


def module_name_for(name: str) -> str:
    """Registry key of a user-facing name: 'etd-rk4' -> 'etd_rk4'."""
    return name.strip().lower().replace("-", "_")


class ModuleRegistry(BaseModel):
    """Tracks registered module paths per implementation name."""
    module_paths: Dict[str, str] = Field(default_factory=dict)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class GenericFactory(Generic[T]):
    """
    Locates implementations of an interface among the modules of a package.

    Subclasses own their registry so that two factories never share names.
    """

    _registry: ModuleRegistry = ModuleRegistry()

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls._registry = ModuleRegistry()

    @classmethod
    def register_package(cls, package: str) -> None:
        """Registers all modules within the specified package."""
        internal_logger.debug(f"Registering modules in package: {package}")
        package_obj = cls._load_package(package)
        if package_obj:
            for _, module_name, _ in pkgutil.iter_modules(package_obj.__path__):
                full_module_name = f"{package}.{module_name}"
                cls._registry.module_paths[module_name] = full_module_name
                internal_logger.debug(f"Registered module: {full_module_name}")

    @classmethod
    def _load_package(cls, package: str) -> Optional[ModuleType]:
        """Loads a package, returning None if it fails."""
        try:
            return importlib.import_module(package)
        except ModuleNotFoundError as e:
            internal_logger.debug(f"Package '{package}' not found, skipping: {e}")
            return None

    @staticmethod
    def _locate_implementation(module: ModuleType, interface: Type[T]) -> Optional[Type[T]]:
        """Locates a class defined in the module that implements the given interface."""
        for _, obj in inspect.getmembers(module, inspect.isclass):
            if issubclass(obj, interface) and obj is not interface and obj.__module__ == module.__name__:
                return obj
        return None

    @classmethod
    def _load_module(cls, name: str, package: str) -> None:
        """Loads a specific module dynamically."""
        full_module_name = f"{package}.{name}"
        try:
            importlib.import_module(full_module_name)
        except ModuleNotFoundError as e:
            internal_logger.error(f"Failed to load module '{full_module_name}': {e}")
            raise BLError(Code.E0307, message=f"Module '{name}' not found in package '{package}'") from e
        cls._registry.module_paths[name] = full_module_name
        internal_logger.debug(f"Lazily loaded module: {full_module_name}")

    @classmethod
    def create_instance(cls, name: str, interface: Type[T], package: str,
                        extra_kwargs: Optional[dict] = None) -> T:
        """Instantiate the implementation registered under ``name``."""
        key = module_name_for(name)
        if key not in cls._registry.module_paths:
            cls._load_module(key, package)
        module_path = cls._registry.module_paths[key]
        module = importlib.import_module(module_path)
        implementation = cls._locate_implementation(module, interface)
        if not implementation:
            raise BLError(Code.E0307, message=f"No implementation found in '{module_path}' for {interface.__name__}")

        sig = inspect.signature(implementation.__init__)
        kwargs = {k: v for k, v in (extra_kwargs or {}).items() if k in sig.parameters}
        instance = implementation(**kwargs)
        internal_logger.debug(f"Instantiated {implementation.__name__} from {module_path}")
        return instance

    @classmethod
    def available(cls, package: str) -> list:
        """Names of the registered implementations, in user-facing form."""
        if not cls._registry.module_paths:
            cls.register_package(package)
        return sorted(name.replace("_", "-") for name in cls._registry.module_paths)
