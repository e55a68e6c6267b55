from enum import Enum
from typing import Dict, Type

from nhdp.common.exceptions import SamplerException
from nhdp.sampler import logger
from nhdp.sampler.moves import SamplerMove, SamplerMoveArgs
from nhdp.sampler.moves.dishes import DishesMove
from nhdp.sampler.moves.parameters import AlphasMove, Sigma2Move
from nhdp.sampler.moves.restaurants import RestaurantsMove
from nhdp.sampler.moves.tables import TablesMove


# Enum defining the kernels a sweep can be composed of
class MoveType(Enum):
    RESTAURANTS = "RESTAURANTS"
    TABLES = "TABLES"
    DISHES = "DISHES"
    SIGMA2 = "SIGMA2"
    ALPHAS = "ALPHAS"


# Registry mapping move types to their implementing classes
SAMPLER_MOVE_REGISTRY = {
    MoveType.RESTAURANTS: RestaurantsMove,
    MoveType.TABLES: TablesMove,
    MoveType.DISHES: DishesMove,
    MoveType.SIGMA2: Sigma2Move,
    MoveType.ALPHAS: AlphasMove,
}


class MoveFactory:
    """
    Factory class for creating sampler move instances.
    Handles move instantiation based on move type.
    """

    def __init__(
        self,
        move_args: SamplerMoveArgs,
        move_registry: Dict[MoveType, Type[SamplerMove]] = SAMPLER_MOVE_REGISTRY,
    ):
        """
        Initialize the move factory.

        Args:
            move_args: Dataset and chain configuration shared by the moves
            move_registry: Registry mapping move types to move classes
        """
        self._registry = move_registry
        self._move_args = move_args

    def get_move(self, move_name: str) -> SamplerMove:
        """
        Get a move instance based on the move name.

        Args:
            move_name: Name of the move to instantiate

        Returns:
            An instance of the requested move

        Raises:
            SamplerException: If the move name is invalid or not in the registry
        """
        try:
            move_type = MoveType(move_name.upper())
        except ValueError as e:
            logger.exception(f"Invalid move name: {move_name}. Error: {e}")
            raise SamplerException(f"Move '{move_name}' is not supported")

        move_class = self._registry.get(move_type, None)
        if not move_class:
            raise SamplerException(f"No move found for type: {move_name}")

        return move_class(self._move_args)
