from benney_luke.common.base_factory import GenericFactory
from benney_luke.common.integrator_interface import IntegratorInterface


class IntegratorFactory(GenericFactory[IntegratorInterface]):
    DEFAULT_PACKAGE = "benney_luke.engines.integrators"

    @classmethod
    def get_integrator(cls, name: str, **kwargs) -> IntegratorInterface:
        """Instantiate the integrator called ``name`` ('imex-spectral' or 'etd-rk4')."""
        return cls.create_instance(name, IntegratorInterface, cls.DEFAULT_PACKAGE, extra_kwargs=kwargs)
